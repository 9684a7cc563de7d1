from dataclasses import dataclass, field


def _default_word_bounds():
    return {
        "h0": 3,
        "triangle": 3,
        "delta": 3,
        "mc-rel-check": 3,
        "d2-check": 4,
        "homotopy-check": 4,
    }


@dataclass(frozen=True)
class EngineSettings:
    # Largest coderivation arity kept by brackets (degrees <= 3 plus d^2 tests).
    max_arity: int = 5
    word_bounds: dict = field(default_factory=_default_word_bounds)
    # Exhaustive gauge search: integer grid radius and the limits it runs under.
    search_radius: int = 2
    search_max_parameters: int = 4
    search_max_nilpotency: int = 3
    seed: int = 0
    samples: int = 20

    def word_bound(self, command, override=None):
        if override is not None:
            return override
        return self.word_bounds.get(command, 3)


DEFAULT_SETTINGS = EngineSettings()
