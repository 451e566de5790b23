"""Network model: topology, link association matrices and interference coupling.

Conventions used throughout the package:

* ``N`` base stations, ``K`` user terminals, ``2K`` service links.
* Link index ``l`` in ``0..K-1`` is the uplink of UE ``l``; ``K..2K-1`` is the
  downlink of UE ``l - K``.  Vectors over links (``w``, ``p``, demands) use
  this ordering, uplink block first.
* Channel gains are linear amplitude-squared attenuations in ``(0, 1]``.
* Powers are watts; PSD values are watts per resource block.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ModelError

log = logging.getLogger(__name__)

MACRO = "macro"
PICO = "pico"

OVERLAP_NONE = "none"
OVERLAP_PAIRWISE = "cell_pairwise"
OVERLAP_SPECIFIC = "cell_specific"
OVERLAP_SCHEMES = (OVERLAP_NONE, OVERLAP_PAIRWISE, OVERLAP_SPECIFIC)


def _readonly(a, dtype=float):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BaseStation:
    """A transmitter/receiver site. ``max_power_w`` is the total DL budget
    over the whole band."""

    position: tuple[float, float]
    kind: str = MACRO
    max_power_w: float = 19.953  # 43 dBm

    def __post_init__(self):
        if self.kind not in (MACRO, PICO):
            raise ModelError(f"unknown base station kind: {self.kind!r}")
        if not self.max_power_w > 0:
            raise ModelError("base station max power must be positive")


@dataclass(frozen=True)
class UserTerminal:
    """A user terminal. ``max_power_w`` bounds its UL transmit power over the
    whole band."""

    position: tuple[float, float]
    service_class: int = 0
    max_power_w: float = 0.1585  # 22 dBm

    def __post_init__(self):
        if not self.max_power_w > 0:
            raise ModelError("user terminal max power must be positive")


@dataclass(frozen=True)
class Scenario:
    """Static snapshot of the network.

    Attributes
    ----------
    bs_list, ue_list : lists of sites and terminals.
    h0 : (N, K) BS-to-UE linear channel gains.
    h1 : (N, N) BS-to-BS linear channel gains (symmetric; diagonal stored but
        never read).
    h2 : (K, K) UE-to-UE linear channel gains (symmetric).
    demands : (2K,) required bit rates in bit/s, uplink block first.
    rb_count : total number of resource blocks in the shared band.
    rb_bandwidth : effective bandwidth per RB in Hz.
    noise_psd : receiver noise power per RB in watts.
    """

    bs_list: tuple[BaseStation, ...]
    ue_list: tuple[UserTerminal, ...]
    h0: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    demands: np.ndarray
    rb_count: int
    rb_bandwidth: float
    noise_psd: float

    def __post_init__(self):
        object.__setattr__(self, "bs_list", tuple(self.bs_list))
        object.__setattr__(self, "ue_list", tuple(self.ue_list))
        for name in ("h0", "h1", "h2", "demands"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        self._validate()

    def _validate(self):
        n, k = self.n_bs, self.n_ue
        if n < 1 or k < 1:
            raise ModelError("need at least one BS and one UE")
        if self.h0.shape != (n, k) or self.h1.shape != (n, n) or self.h2.shape != (k, k):
            raise ModelError("channel gain matrix shapes do not match topology")
        for name in ("h0", "h1", "h2"):
            h = getattr(self, name)
            if not np.all(h > 0) or not np.all(h <= 1.0):
                raise ModelError(f"{name} entries must be linear gains in (0, 1]")
        if not np.array_equal(self.h1, self.h1.T):
            raise ModelError("h1 must be symmetric")
        if not np.array_equal(self.h2, self.h2.T):
            raise ModelError("h2 must be symmetric")
        if self.demands.shape != (2 * k,):
            raise ModelError("demands must have one entry per link (2K)")
        if not np.all(self.demands > 0):
            raise ModelError("demands must be strictly positive")
        if int(self.rb_count) < 1:
            raise ModelError("rb_count must be >= 1")
        if not self.rb_bandwidth > 0 or not self.noise_psd > 0:
            raise ModelError("rb_bandwidth and noise_psd must be positive")

    @property
    def n_bs(self) -> int:
        return len(self.bs_list)

    @property
    def n_ue(self) -> int:
        return len(self.ue_list)

    @property
    def n_links(self) -> int:
        return 2 * self.n_ue

    def bs_max_powers(self) -> np.ndarray:
        return np.array([b.max_power_w for b in self.bs_list])

    def ue_max_powers(self) -> np.ndarray:
        return np.array([u.max_power_w for u in self.ue_list])


@dataclass(frozen=True)
class Association:
    """Serving-BS maps for both directions plus the derived binary matrices.

    ``a_ul``/``a_dl`` are N x K with exactly one 1 per column; ``a`` stacks
    them side by side over the 2K links.  ``a_ext`` maps transmitters
    (K UEs then N BSs) to links, and ``lambda_map`` expands a per-transmitter
    PSD vector to a per-link one via ``p = lambda_map @ p_bar``.
    """

    b_ul: np.ndarray
    b_dl: np.ndarray
    n_bs: int

    def __post_init__(self):
        object.__setattr__(self, "b_ul", _readonly(self.b_ul, dtype=int))
        object.__setattr__(self, "b_dl", _readonly(self.b_dl, dtype=int))
        if self.b_ul.ndim != 1 or self.b_ul.shape != self.b_dl.shape:
            raise ModelError("b_ul and b_dl must be 1-d and equally sized")
        for b in (self.b_ul, self.b_dl):
            if np.any(b < 0) or np.any(b >= self.n_bs):
                raise ModelError("serving BS index out of range")

    @property
    def n_ue(self) -> int:
        return self.b_ul.shape[0]

    @property
    def serving(self) -> np.ndarray:
        """Serving BS of every link, uplink block first."""
        return np.concatenate([self.b_ul, self.b_dl])

    def _onehot(self, b) -> np.ndarray:
        m = np.zeros((self.n_bs, self.n_ue))
        m[b, np.arange(self.n_ue)] = 1.0
        return m

    @property
    def a_ul(self) -> np.ndarray:
        return self._onehot(self.b_ul)

    @property
    def a_dl(self) -> np.ndarray:
        return self._onehot(self.b_dl)

    @property
    def a(self) -> np.ndarray:
        return np.hstack([self.a_ul, self.a_dl])

    @property
    def a_ext(self) -> np.ndarray:
        k, n = self.n_ue, self.n_bs
        top = np.hstack([np.eye(k), np.zeros((k, k))])
        bot = np.hstack([np.zeros((n, k)), self.a_dl])
        return np.vstack([top, bot])

    @property
    def lambda_map(self) -> np.ndarray:
        k, n = self.n_ue, self.n_bs
        top = np.hstack([np.eye(k), np.zeros((k, n))])
        bot = np.hstack([np.zeros((k, k)), self.a_dl.T])
        return np.vstack([top, bot])

    def to_dict(self) -> dict:
        return {"b_ul": self.b_ul.tolist(), "b_dl": self.b_dl.tolist(), "n_bs": self.n_bs}


@dataclass(frozen=True)
class CouplingModel:
    """Link gain coupling between the 2K links.

    ``v`` holds the raw cross gains assembled from the four direction blocks;
    ``v_tilde`` zeroes every pair served by a common BS (no intra-cell
    interference) as well as the device self-pair of each UE's own uplink
    into its own downlink, and carries any overlap adjustment.  ``d_diag``
    is the direct gain of each link and ``sigma_vec`` the per-link noise PSD.
    """

    v: np.ndarray
    v_tilde: np.ndarray
    d_diag: np.ndarray
    sigma_vec: np.ndarray

    def __post_init__(self):
        for name in ("v", "v_tilde", "d_diag", "sigma_vec"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        if not np.all(self.d_diag > 0):
            raise ModelError("direct link gains must be strictly positive")
        if not np.all(self.sigma_vec > 0):
            raise ModelError("noise PSD must be strictly positive")

    @property
    def n_links(self) -> int:
        return self.d_diag.shape[0]

    def with_noise(self, noise_psd: float) -> "CouplingModel":
        return replace(self, sigma_vec=np.full(self.n_links, noise_psd))


@dataclass(frozen=True)
class OverlapModel:
    """UL/DL band-overlap adjustment derived from historical per-cell loads.

    ``load_ul``/``load_dl`` are length-N historical load estimates in [0, 1].
    ``scheme`` selects how cross-direction interference terms are scaled;
    ``none`` leaves the coupling untouched (full overlap).
    """

    scheme: str = OVERLAP_NONE
    load_ul: np.ndarray = field(default_factory=lambda: np.zeros(0))
    load_dl: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.scheme not in OVERLAP_SCHEMES:
            raise ModelError(f"unknown overlap scheme: {self.scheme!r}")
        object.__setattr__(self, "load_ul", _readonly(self.load_ul))
        object.__setattr__(self, "load_dl", _readonly(self.load_dl))
        for v in (self.load_ul, self.load_dl):
            if v.size and (np.any(v < 0) or np.any(v > 1)):
                raise ModelError("historical loads must lie in [0, 1]")


def build_coupling(scenario: Scenario, assoc: Association) -> CouplingModel:
    """Assemble the 2K x 2K link gain coupling matrices for an association.

    The four blocks are, in receiver-block/transmitter-block order:
    UL<-UL ``A_ul^T H0``, UL<-DL ``A_ul^T H1 A_dl``, DL<-UL ``H2`` and
    DL<-DL ``H0^T A_dl``.  ``v_tilde`` equals ``v`` with every entry whose
    two links share a serving BS set to zero (own-cell scheduling is
    orthogonal), which in particular clears the diagonal.  The DL<-UL entry
    of a UE against itself is also cleared even when its two serving BSs
    differ: that coupling would be the ``h2`` self-gain of the device, which
    is not a propagation channel and is never read.  The same UE's UL<-DL
    entry stays (a real BS-to-BS path when the association is decoupled).
    """
    n, k = scenario.n_bs, scenario.n_ue
    if assoc.n_ue != k or assoc.n_bs != n:
        raise ModelError("association does not match scenario dimensions")

    b_ul, b_dl = assoc.b_ul, assoc.b_dl
    ue_idx = np.arange(k)

    v = np.empty((2 * k, 2 * k))
    v[:k, :k] = scenario.h0[b_ul, :]                  # UE j -> BS serving UL k
    v[:k, k:] = scenario.h1[np.ix_(b_ul, b_dl)]       # BS of DL j -> BS of UL k
    v[k:, :k] = scenario.h2                           # UE j -> UE k
    v[k:, k:] = scenario.h0[b_dl, :].T                # BS of DL j -> UE k

    d_diag = np.concatenate([scenario.h0[b_ul, ue_idx], scenario.h0[b_dl, ue_idx]])

    serving = assoc.serving
    same_bs = serving[:, None] == serving[None, :]
    v_tilde = np.where(same_bs, 0.0, v)
    v_tilde[k + ue_idx, ue_idx] = 0.0  # own-UL into own-DL: h2 self-gain, never read

    sigma_vec = np.full(2 * k, scenario.noise_psd)
    return CouplingModel(v=v, v_tilde=v_tilde, d_diag=d_diag, sigma_vec=sigma_vec)


def pairwise_overlap_factors(load_ul, load_dl):
    """Cell-pairwise directional overlap factors from per-cell loads.

    For opposite directions the factor is ``max{0, (v_j^Y + v_i^X - 1)/v_i^X}``,
    the fraction of receiver-cell-i band in direction X that cell j's
    direction-Y band must overlap.  Same-direction factors are clamped to 1
    (the raw ratio ``v_j/v_i`` can exceed 1 and carries no extra information
    for a probability; it is logged at DEBUG).  A zero load in a denominator
    yields factor 0 and a diagnostic.

    Returns a dict keyed by ("ul"/"dl" receiver, "ul"/"dl" interferer) of
    N x N factor matrices.
    """
    loads = {"ul": np.asarray(load_ul, dtype=float), "dl": np.asarray(load_dl, dtype=float)}
    n = loads["ul"].shape[0]
    factors = {}
    for rx in ("ul", "dl"):
        for tx in ("ul", "dl"):
            vi = loads[rx][:, None]
            vj = loads[tx][None, :]
            if rx == tx:
                raw = np.divide(vj, vi, out=np.zeros((n, n)), where=vi > 0)
                log.debug("same-direction raw overlap ratios (%s): %s", rx, raw)
                fac = np.ones((n, n))
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    fac = (vj + vi - 1.0) / vi
                fac = np.where(vi > 0, np.clip(fac, 0.0, 1.0), 0.0)
                if np.any(loads[rx] == 0):
                    log.warning(
                        "zero historical %s load in %d cell(s); overlap factor set to 0",
                        rx, int(np.sum(loads[rx] == 0)),
                    )
            factors[(rx, tx)] = fac
    return factors


def apply_overlap(coupling: CouplingModel, overlap: OverlapModel, assoc: Association) -> CouplingModel:
    """Scale the cross-direction interference blocks of ``v_tilde``.

    ``cell_pairwise`` lifts the N x N directional factors to links via
    ``A_x^T O A_y`` and multiplies elementwise; ``cell_specific`` scales the
    UL<-DL block by ``c_ul[b_ul[k]] * c_dl[b_dl[j]]`` and the DL<-UL block by
    ``c_dl[b_dl[k]] * c_ul[b_ul[j]]``, with the c vectors taken from the
    historical loads.  Same-direction blocks are unchanged (factor 1).
    """
    if overlap.scheme == OVERLAP_NONE:
        return coupling

    k = assoc.n_ue
    if overlap.load_ul.shape[0] != assoc.n_bs or overlap.load_dl.shape[0] != assoc.n_bs:
        raise ModelError("overlap loads must have one entry per BS")

    vt = np.array(coupling.v_tilde)
    b_ul, b_dl = assoc.b_ul, assoc.b_dl

    if overlap.scheme == OVERLAP_PAIRWISE:
        fac = pairwise_overlap_factors(overlap.load_ul, overlap.load_dl)
        # lift A_x^T O A_y: entry (k, j) is O[serving_x[k], serving_y[j]]
        vt[:k, k:] *= fac[("ul", "dl")][np.ix_(b_ul, b_dl)]
        vt[k:, :k] *= fac[("dl", "ul")][np.ix_(b_dl, b_ul)]
    else:  # cell_specific
        c_ul, c_dl = overlap.load_ul, overlap.load_dl
        vt[:k, k:] *= np.outer(c_ul[b_ul], c_dl[b_dl])
        vt[k:, :k] *= np.outer(c_dl[b_dl], c_ul[b_ul])

    return replace(coupling, v_tilde=vt)
