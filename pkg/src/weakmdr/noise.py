from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NoiseModel:
    """Two multiplicative dephasing knobs.

    ``source_coherence`` scales the |HH><VV| coherence of the photon pair.
    ``interferometer_visibility`` is applied once where photon 1 is
    recombined before the teleportation readout, and once as a loss of
    readout contrast on each probe path.
    """

    source_coherence: float = 1.0
    interferometer_visibility: float = 1.0

    def __post_init__(self):
        for name in ("source_coherence", "interferometer_visibility"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name}={val} outside [0, 1]")

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls(1.0, 1.0)

    @property
    def is_ideal(self) -> bool:
        return self.source_coherence == 1.0 and self.interferometer_visibility == 1.0

    @property
    def bound_factor(self) -> float:
        return self.source_coherence * self.interferometer_visibility
