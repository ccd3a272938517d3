from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ArgumentError


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerances for eigenvalue classification, PSD checks and reconstruction.

    With ``relative`` set, ``eig_zero`` is scaled by ``max(1, ‖H‖₂)`` and
    ``psd_slack`` by ``1 + ‖H‖₂`` of the matrix under test; ``recon`` is
    always an absolute max-entry error.
    """

    eig_zero: float = 1e-9
    psd_slack: float = 1e-9
    recon: float = 1e-9
    relative: bool = True

    def __post_init__(self) -> None:
        for name in ("eig_zero", "psd_slack", "recon"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ArgumentError(f"tolerance {name} must be a finite value >= 0, got {value!r}")

    @classmethod
    def uniform(cls, value: float, *, relative: bool = True) -> ToleranceConfig:
        return cls(eig_zero=value, psd_slack=value, recon=value, relative=relative)

    def with_overrides(
        self,
        *,
        eig_zero: float | None = None,
        psd_slack: float | None = None,
        recon: float | None = None,
        relative: bool | None = None,
    ) -> ToleranceConfig:
        changes: dict[str, float | bool] = {
            name: value
            for name, value in (("eig_zero", eig_zero), ("psd_slack", psd_slack), ("recon", recon))
            if value is not None
        }
        if relative is not None:
            changes["relative"] = relative
        return replace(self, **changes) if changes else self

    def eig_threshold(self, scale: float) -> float:
        if not self.relative:
            return self.eig_zero
        return self.eig_zero * max(1.0, scale)

    def psd_threshold(self, scale: float) -> float:
        if not self.relative:
            return self.psd_slack
        return self.psd_slack * (1.0 + scale)


DEFAULT_TOLERANCE = ToleranceConfig()
