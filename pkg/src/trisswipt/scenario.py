"""Scenario description: geometry, user layout, budgets and channel statistics."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .channel import ChannelParams, UpaGeometry

__all__ = ["Scenario", "dbm_to_watts", "watts_to_dbm", "square_array"]


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(w: float) -> float:
    return 10.0 * np.log10(w) + 30.0


def square_array(n: int) -> tuple[int, int]:
    """(n_h, n_v) for ``n`` elements, as square as possible."""
    n_h = int(np.floor(np.sqrt(n)))
    while n % n_h:
        n_h -= 1
    return n // n_h, n_h


@dataclass(frozen=True)
class Scenario:
    """One simulated deployment.

    Defaults: transceiver at 4.5 m, ID users 20-50 m away at 1.5 m height,
    path-loss exponents 3.2 (ID) and 2.2 (EH), 10 dBm per element, -90 dBm
    noise, half-wavelength spacing. ``c0_db``, ``rician_kappa``, ``zeta``,
    the EH user ring and the harvesting target are assumed values.
    ``q_t`` is an absolute target in watts; when ``None`` the target is
    ``q_t_fraction`` of the reference harvest (see ``pipeline.reference_harvest``).
    """

    n_h: int = 4
    n_v: int = 4
    K: int = 2
    G: int = 2
    p_t_dbm: float = 10.0
    noise_dbm: float = -90.0
    zeta: float = 0.5
    q_t: float | None = None
    q_t_fraction: float = 0.5
    c0_db: float = -30.0
    rician_kappa: float = 2.0
    alpha_id: float = 3.2
    alpha_eh: float = 2.2
    tx_position: tuple = (0.0, 0.0, 4.5)
    user_height: float = 1.5
    id_range: tuple = (20.0, 50.0)
    eh_range: tuple = (3.0, 8.0)
    sector_half_angle_deg: float = 60.0
    wavelength: float = 0.01
    spacing_wavelengths: float = 0.5
    rate_base: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.K < 0 or self.G < 0:
            raise ValueError("user counts must be non-negative")
        if self.id_range[0] <= 0 or self.id_range[1] < self.id_range[0]:
            raise ValueError(f"invalid ID range {self.id_range}")
        if self.eh_range[0] <= 0 or self.eh_range[1] < self.eh_range[0]:
            raise ValueError(f"invalid EH range {self.eh_range}")
        if self.G == 0 and (self.q_t or 0) > 0:
            raise ValueError("a positive EH target needs at least one EH user")

    @property
    def n(self) -> int:
        return self.n_h * self.n_v

    @property
    def geometry(self) -> UpaGeometry:
        return UpaGeometry(self.n_h, self.n_v, self.spacing_wavelengths * self.wavelength,
                           self.wavelength)

    @property
    def id_channel(self) -> ChannelParams:
        return ChannelParams(10 ** (self.c0_db / 10), self.alpha_id, self.rician_kappa)

    @property
    def eh_channel(self) -> ChannelParams:
        return ChannelParams(10 ** (self.c0_db / 10), self.alpha_eh, self.rician_kappa)

    @property
    def p_t(self) -> float:
        return dbm_to_watts(self.p_t_dbm)

    @property
    def sigma2(self) -> float:
        return dbm_to_watts(self.noise_dbm)

    def with_n(self, n: int) -> "Scenario":
        n_h, n_v = square_array(n)
        return replace(self, n_h=n_h, n_v=n_v)

    def replace(self, **kw) -> "Scenario":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tx_position"] = list(self.tx_position)
        d["id_range"] = list(self.id_range)
        d["eh_range"] = list(self.eh_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known - {"n"}
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        kw = {k: v for k, v in d.items() if k in known}
        for key in ("tx_position", "id_range", "eh_range"):
            if key in kw:
                kw[key] = tuple(float(v) for v in kw[key])
        scen = cls(**kw)
        if "n" in d:
            scen = scen.with_n(int(d["n"]))
        return scen
