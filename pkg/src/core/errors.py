class DeformationError(Exception):
    """ Base class for everything the engine raises on purpose. """


class InputError(DeformationError, ValueError):
    """ Malformed or inconsistent input (bad shapes, bad files, invalid algebras). """


class TruncationError(DeformationError):
    """ An arity or polynomial-degree bound would be exceeded. """


class ContractError(DeformationError):
    """ An operation was called outside the domain it is defined on. """


class FlatnessError(DeformationError):
    """ A flat deformation was required but the given one is not flat. """
