"""Control-free spectral estimation from magnitude-only time series.

Submodules: :mod:`simcore` (exact small-system simulation), :mod:`shotnoise`
(finite-shot magnitudes), :mod:`dsp` (Fourier conventions, metrics,
ambiguity alignment), :mod:`vpr` (vectorial phase retrieval), :mod:`hio2d`
(2D hybrid input-output), :mod:`gatecost` (closed-form circuit costs) and
:mod:`experiments` / :mod:`cli` (recipes and command line).
"""

__version__ = "0.1.0"
