"""Rician channels from a uniform planar TRIS array to single-antenna users."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numeric import make_rng, sample_cn01

__all__ = [
    "UpaGeometry",
    "ChannelParams",
    "ChannelSet",
    "steering_vector",
    "path_gain",
    "draw_channel",
    "departure_angles",
    "draw_scenario_channels",
]


@dataclass(frozen=True)
class UpaGeometry:
    n_h: int
    n_v: int
    element_spacing: float = 0.005
    wavelength: float = 0.01

    def __post_init__(self):
        if self.n_h < 1 or self.n_v < 1:
            raise ValueError("array needs at least one element per axis")
        if self.element_spacing <= 0 or self.wavelength <= 0:
            raise ValueError("spacing and wavelength must be positive")

    @property
    def n(self) -> int:
        return self.n_h * self.n_v


@dataclass(frozen=True)
class ChannelParams:
    """Large-scale and Rician parameters of one link type.

    ``c0`` is the linear power gain at the 1 m reference distance.
    """

    c0: float = 1e-3
    alpha: float = 3.2
    rician_kappa: float = 2.0

    def __post_init__(self):
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.alpha < 0 or self.rician_kappa < 0:
            raise ValueError("alpha and kappa must be non-negative")


@dataclass
class ChannelSet:
    """Channels of all users, one row per user.

    ``h_id`` has shape (K, N) and ``h_eh`` shape (G, N). Positions are kept
    for reporting and for path-loss checks; they may be empty.
    """

    h_id: np.ndarray
    h_eh: np.ndarray
    id_positions: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    eh_positions: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    def __post_init__(self):
        self.h_id = np.asarray(self.h_id, dtype=np.complex128)
        self.h_eh = np.asarray(self.h_eh, dtype=np.complex128)
        if self.h_id.ndim != 2 or self.h_eh.ndim != 2:
            raise ValueError("channels must be 2-D arrays with one row per user")
        if self.h_eh.shape[1] != self.h_id.shape[1]:
            raise ValueError("ID and EH channels must have the same length")
        if not (np.all(np.isfinite(self.h_id)) and np.all(np.isfinite(self.h_eh))):
            raise ValueError("channels must be finite")

    @property
    def n(self) -> int:
        return self.h_id.shape[1]

    @property
    def k(self) -> int:
        return self.h_id.shape[0]

    @property
    def g(self) -> int:
        return self.h_eh.shape[0]


def steering_vector(geom: UpaGeometry, theta: float, psi: float) -> np.ndarray:
    """LoS array response, horizontal factor kron vertical factor.

    The horizontal axis advances by ``sin(theta) cos(psi)`` and the vertical
    axis by ``sin(theta) sin(psi)`` per element, so ``theta`` is measured
    from the array broadside.
    """
    k = 2 * np.pi / geom.wavelength * geom.element_spacing
    a_h = np.exp(-1j * k * np.arange(geom.n_h) * np.sin(theta) * np.cos(psi))
    a_v = np.exp(-1j * k * np.arange(geom.n_v) * np.sin(theta) * np.sin(psi))
    return np.kron(a_h, a_v)


def path_gain(params: ChannelParams, distance: float) -> float:
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    return params.c0 * distance ** (-params.alpha)


def draw_channel(geom: UpaGeometry, params: ChannelParams, distance: float,
                 theta: float, psi: float, rng: np.random.Generator) -> np.ndarray:
    """One Rician channel realization at the given range and departure angles."""
    gain = path_gain(params, distance)
    nlos = sample_cn01(rng, geom.n)
    kappa = params.rician_kappa
    if np.isinf(kappa):
        w_los, w_nlos = 1.0, 0.0
    else:
        w_los, w_nlos = np.sqrt(kappa / (kappa + 1)), np.sqrt(1 / (kappa + 1))
    return np.sqrt(gain) * (w_los * steering_vector(geom, theta, psi) + w_nlos * nlos)


def departure_angles(tx: np.ndarray, positions: np.ndarray):
    """Distances and (theta, psi) for users seen from an array facing +x.

    The array lies in the y-z plane. ``theta`` is the angle off broadside and
    ``psi`` the in-plane angle, so ``sin(theta)cos(psi)`` is the y direction
    cosine and ``sin(theta)sin(psi)`` the z direction cosine.
    """
    rel = np.atleast_2d(positions) - np.asarray(tx)
    dist = np.linalg.norm(rel, axis=1)
    u = rel / dist[:, None]
    theta = np.arccos(np.clip(u[:, 0], -1.0, 1.0))
    psi = np.arctan2(u[:, 2], u[:, 1])
    return dist, theta, psi


def _sector_positions(rng, count, r_range, half_angle, height):
    # area-uniform radius in the annulus, uniform azimuth around +x
    u = rng.random((count, 2))
    r2 = r_range[0] ** 2 + u[:, 0] * (r_range[1] ** 2 - r_range[0] ** 2)
    r = np.sqrt(r2)
    az = (2 * u[:, 1] - 1) * half_angle
    return np.column_stack([r * np.cos(az), r * np.sin(az), np.full(count, height)])


def draw_scenario_channels(scenario) -> ChannelSet:
    """Place users for ``scenario`` and draw every TRIS-to-user channel.

    Each user has its own random stream keyed on the scenario seed, so the
    realization of user ``k`` does not depend on ``K``, ``G`` or on the sweep
    value being varied.
    """
    geom = scenario.geometry
    tx = np.asarray(scenario.tx_position, dtype=float)
    half = np.deg2rad(scenario.sector_half_angle_deg)
    pos_id = _sector_positions(make_rng(scenario.seed, "id-positions"), scenario.K,
                               scenario.id_range, half, scenario.user_height)
    pos_eh = _sector_positions(make_rng(scenario.seed, "eh-positions"), scenario.G,
                               scenario.eh_range, half, scenario.user_height)

    def _draw(positions, params, tag):
        rows = []
        if len(positions):
            dist, theta, psi = departure_angles(tx, positions)
            for i in range(len(positions)):
                rng = make_rng(scenario.seed, f"nlos-{tag}-{i}")
                rows.append(draw_channel(geom, params, dist[i], theta[i], psi[i], rng))
        return np.array(rows, dtype=np.complex128).reshape(len(positions), geom.n)

    h_id = _draw(pos_id, scenario.id_channel, "id")
    h_eh = _draw(pos_eh, scenario.eh_channel, "eh")
    return ChannelSet(h_id=h_id, h_eh=h_eh, id_positions=pos_id, eh_positions=pos_eh)
