"""Link association policies: coupled, offset-decoupled and pathloss-decoupled.

Downlink association always follows the strongest reference signal (RSRP).
Uplink association may differ: ``deud_o`` adds a cell-selection offset to the
reference signals of pico cells in UL, ``deud_p`` picks the uplink server by
best channel gain (smallest pathloss).  Ties break to the lowest BS index so
results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import PICO, Association, Scenario
from .units import linear_to_db, watt_to_dbm

COUD = "coud"
DEUD_O = "deud_o"
DEUD_P = "deud_p"

# Pico UL cell-selection offsets swept in the policy study (dB).
SWEEP_OFFSETS_DB = (0,) + tuple(range(1, 52, 2))

# Offset equal to the macro/pico transmit power gap makes deud_o coincide
# with deud_p (43 dBm - 30 dBm with the default powers).
DEUD_P_EQUIVALENT_OFFSET_DB = 13.0


@dataclass(frozen=True)
class Policy:
    kind: str
    offset_db: float = 0.0

    def __post_init__(self):
        if self.kind not in (COUD, DEUD_O, DEUD_P):
            raise ConfigError(f"unknown association policy: {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == DEUD_O:
            return f"deud-o:{self.offset_db:g}"
        return self.kind.replace("_", "-")

    def equivalent_to(self):
        """Policy this offset reduces to under the default 13 dB power gap."""
        if self.kind != DEUD_O:
            return None
        if self.offset_db == 0:
            return COUD
        if self.offset_db == DEUD_P_EQUIVALENT_OFFSET_DB:
            return DEUD_P
        return None

    @classmethod
    def parse(cls, text: str) -> "Policy":
        """Parse CLI syntax ``coud``, ``deud-p`` or ``deud-o:OFFSET``."""
        text = text.strip().lower().replace("_", "-")
        if text == "coud":
            return cls(COUD)
        if text == "deud-p":
            return cls(DEUD_P)
        if text.startswith("deud-o:"):
            try:
                return cls(DEUD_O, offset_db=float(text.split(":", 1)[1]))
            except ValueError as exc:
                raise ConfigError(f"bad offset in policy {text!r}") from exc
        raise ConfigError(f"cannot parse policy {text!r}")


def rsrp(scenario: Scenario) -> np.ndarray:
    """Reference signal received power in dBm, one row per BS.

    The reference power is the per-RB share of the BS budget, ``q_max / W0``;
    under a uniform RB count the argmax over BSs is unaffected by this choice.
    """
    ref_dbm = watt_to_dbm(scenario.bs_max_powers() / scenario.rb_count)
    return ref_dbm[:, None] + linear_to_db(scenario.h0)


def _ul_offsets_db(policy: Policy, scenario: Scenario) -> np.ndarray:
    off = np.zeros(scenario.n_bs)
    if policy.kind == DEUD_O:
        for n, bs in enumerate(scenario.bs_list):
            if bs.kind == PICO:
                off[n] = policy.offset_db
    return off


def associate(policy: Policy, scenario: Scenario) -> Association:
    """Bind a policy to a scenario, producing serving maps for both directions."""
    rs = rsrp(scenario)
    b_dl = np.argmax(rs, axis=0)
    if policy.kind == COUD:
        b_ul = b_dl
    elif policy.kind == DEUD_O:
        b_ul = np.argmax(rs + _ul_offsets_db(policy, scenario)[:, None], axis=0)
    else:  # DEUD_P: best uplink channel, i.e. least attenuation
        b_ul = np.argmax(scenario.h0, axis=0)
    return Association(b_ul=b_ul, b_dl=b_dl, n_bs=scenario.n_bs)


def policy_sweep() -> list[Policy]:
    """The offset policy set: deud_o with pico UL offsets {0, 1, 3, ..., 51} dB."""
    return [Policy(DEUD_O, offset_db=float(o)) for o in SWEEP_OFFSETS_DB]
