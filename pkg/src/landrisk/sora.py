"""SORA intrinsic Ground Risk Class (GRC) lookup and risk-level definitions.

Only the table for UAVs with a maximum characteristic dimension of 1 m is
covered. Strings are kept with their original wording and spelling.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Visibility(str, Enum):
    VLOS = "VLOS"
    BVLOS = "BVLOS"


class Environment(str, Enum):
    CONTROLLED_GROUND = "controlled_ground"
    SPARSELY_POPULATED = "sparsely_populated"
    POPULATED = "populated"
    GATHERING_OF_PEOPLE = "gathering_of_people"


# (visibility or None for both, environment) -> (row text, class level)
_GRC_ROWS = {
    (None, Environment.CONTROLLED_GROUND): ("VLOS/BVLOS over controlled ground area", 1),
    (Visibility.VLOS, Environment.SPARSELY_POPULATED): ("VLOS in sparsely populated environment", 2),
    (Visibility.BVLOS, Environment.SPARSELY_POPULATED): ("BVLOS in sparsely populated environment", 3),
    (Visibility.VLOS, Environment.POPULATED): ("VLOS in populated environment", 4),
    (Visibility.BVLOS, Environment.POPULATED): ("BVLOS in in populated environment", 5),
    (Visibility.VLOS, Environment.GATHERING_OF_PEOPLE): ("VLOS over gathering of people", 7),
    (Visibility.BVLOS, Environment.GATHERING_OF_PEOPLE): ("BVLOS over gathering of people", 8),
}

GRC_VALUES = frozenset(level for _, level in _GRC_ROWS.values())

RISK_LEVEL_DEFINITIONS = (
    "Ideal landing zones, including grass, dirt, gravel, and predefined markers.",
    "Low level of material damage or damage to the UAV itself.",
    "Moderate risk of loosing or damaging the UAV, along with low risk of material damage.",
    "This level includes important material damage, the imminent risk of losing or "
    "critically damaging the drone, and the moderate risk of indirectly hurting people. "
    "It includes the classes water, tree, window, wall, among others.",
    "This level comprises indirect risk of hurting people, direct risk of hurting fauna,  "
    "and conflicting regions where there is uncertainty about the presence of people in the area.",
    "This level represents the maximum risk and considers the direct risk of hurting people.",
)


@dataclass(frozen=True)
class OperationalScenario:
    visibility: Visibility
    environment: Environment

    def __post_init__(self):
        object.__setattr__(self, "visibility", Visibility(self.visibility))
        object.__setattr__(self, "environment", Environment(self.environment))

    def _row(self) -> tuple[str, int]:
        if self.environment is Environment.CONTROLLED_GROUND:
            return _GRC_ROWS[(None, self.environment)]
        return _GRC_ROWS[(self.visibility, self.environment)]

    @property
    def description(self) -> str:
        return self._row()[0]


def grc_lookup(scenario: OperationalScenario) -> int:
    """Intrinsic GRC of ``scenario``; VLOS and BVLOS share the controlled-ground row."""
    return scenario._row()[1]


def scenarios() -> list[OperationalScenario]:
    """One scenario per table row, in table order."""
    out = []
    for vis, env in _GRC_ROWS:
        out.append(OperationalScenario(vis or Visibility.VLOS, env))
    return out


def risk_level_description(level: int) -> str:
    if not 0 <= level < len(RISK_LEVEL_DEFINITIONS):
        raise ValueError(f"risk level must be in [0, 5], got {level}")
    return RISK_LEVEL_DEFINITIONS[level]
