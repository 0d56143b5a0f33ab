"""Superoscillatory windows for remote preparation of scalar-field states."""
__version__ = "0.1.0"
SPEC_VERSION = "1.0"

from .specfun import bessel_j0, bessel_j0e, bessel_k0, sph_bessel, sph_bessel_first_zero  # noqa: E402
from .superosc import SuperoscParams  # noqa: E402
from .qft import FieldConfig  # noqa: E402

__all__ = ["__version__", "SPEC_VERSION", "SuperoscParams", "FieldConfig", "bessel_j0", "bessel_j0e",
           "bessel_k0", "sph_bessel", "sph_bessel_first_zero"]
