"""Free convolution powers of Brown measures and differentiation flows of
polynomial root measures, computed on radial quantile functions."""

from ._core import *  # noqa: F401,F403
from ._core import RootflowError, __doc__  # noqa: F401
