# app/models/enums.py

from enum import Enum


class WireClass(str, Enum):
    WL = "WL"
    MWL = "MWL"
    LWLSEL = "LWLsel"
    BL = "BL"
    CSL = "CSL"
    LSL = "LSL"
    LDL = "LDL"
    MDL = "MDL"
    BGBUS = "BGBUS"
    GBUS = "GBUS"
    TSV = "TSV"
    DQ = "DQ"


class SalpKind(str, Enum):
    NONE = "none"
    GROUPS = "groups"
    ALL = "all"


class PartialPageKind(str, Enum):
    FULL = "full"
    HALF = "half"
    SUBCHANNELS = "subchannels"


class RoutingScheme(str, Enum):
    CONVENTIONAL = "conventional"
    DLOMAT = "dlomat"


class Tier(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"

    @property
    def rank(self) -> int:
        return "ABCDE".index(self.value)


class Direction(str, Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


class DatapathStageKind(str, Enum):
    MDL = "MDL"
    BGBUS = "BGBUS"
    GBUS = "GBUS"
    TSV = "TSV"
    DQ = "DQ"
