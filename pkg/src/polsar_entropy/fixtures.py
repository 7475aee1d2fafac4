"""Reference parameters: the case-study covariance and region fit summaries.

``SIGMA_U`` is an urban-area covariance observed on an E-SAR L-band image of
Wessling; only its diagonal and upper triangle were printed, the lower
triangle follows by conjugate symmetry. The region tables hold summary
statistics of ML fits (sample size, determinant of the sample mean, fitted
looks) for E-SAR regions A1-A3 and EMISAR regions B1-B3; no pixel data exist
for them, so they are usable only through the determinant.
"""

import math
from dataclasses import dataclass

from .wishart import HermitianMatrix, WishartParams

__all__ = [
    "SIGMA_U_DIAGONAL",
    "SIGMA_U_UPPER",
    "sigma_u",
    "RegionFit",
    "ESAR_REGIONS",
    "EMISAR_REGIONS",
    "REGIONS",
    "ESAR_LOOKS",
]

SIGMA_U_DIAGONAL = (962892.0, 56707.0, 472251.0)
SIGMA_U_UPPER = (19171 - 3579j, -154638 + 191388j, -5798 + 16812j)

# nominal looks of the E-SAR scene, used for the fixed-L model
ESAR_LOOKS = 3.2


def sigma_u():
    return HermitianMatrix.from_upper(SIGMA_U_DIAGONAL, SIGMA_U_UPPER)


@dataclass(frozen=True)
class RegionFit:
    name: str
    n: int
    det_sigma: float
    looks: float
    m: int = 3
    aic_fixed: float = None
    aic_free: float = None

    @property
    def log_det_sigma(self):
        return math.log(self.det_sigma)

    def params(self):
        """Parameters with a scalar covariance of the recorded determinant."""
        return WishartParams.from_log_det(self.m, self.looks, self.log_det_sigma)


ESAR_REGIONS = (
    RegionFit("A1", 3708, 355494.500, 1.361, aic_fixed=50769.93, aic_free=49856.90),
    RegionFit("A2", 2088, 3321.241, 1.657, aic_fixed=18353.35, aic_free=17931.51),
    RegionFit("A3", 1079, 274.189, 2.557, aic_fixed=6749.56, aic_free=6629.15),
)

EMISAR_REGIONS = (
    RegionFit("B1", 3192, 1.609e-5, 6.925),
    RegionFit("B2", 1408, 1.112e-6, 11.937),
    RegionFit("B3", 1848, 5.814e-7, 10.752),
)

REGIONS = {r.name: r for r in ESAR_REGIONS + EMISAR_REGIONS}
