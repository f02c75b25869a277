"""nkgeo: null-Kahler four-geometry, curvature residuals, and the
SL(2)-invariant anti-self-dual metric families tied to the first and second
Painleve equations."""

__version__ = "0.1.0"
