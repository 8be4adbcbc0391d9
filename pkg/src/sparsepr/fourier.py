"""2D Fourier transforms and the magnitude-replacement projection.

Convention: forward transform is unnormalized, inverse carries the
1/(W*H) factor, so inverse(forward(g)) == g. The DC sample sits at
index (0, 0); any fftshift is a display concern handled by the CLI.
"""

from __future__ import annotations

import numpy as np

from .grids import as_complex_field, check_same_shape


def forward_transform(field) -> np.ndarray:
    """Unnormalized forward DFT of a complex field."""
    return np.fft.fft2(as_complex_field(field))


def inverse_transform(spectrum) -> np.ndarray:
    """Inverse DFT, normalized so that inverse(forward(g)) == g."""
    return np.fft.ifft2(as_complex_field(spectrum))


def magnitude_of(spectrum) -> np.ndarray:
    """Pointwise modulus of a spectrum."""
    return np.abs(as_complex_field(spectrum))


def impose_magnitude(spectrum, target) -> np.ndarray:
    """Replace the spectrum's magnitude with `target`, keeping its phase.

    Samples with zero magnitude have undefined phase; they are assigned
    phase 0, i.e. the output there is target + 0j.
    """
    s = as_complex_field(spectrum)
    t = np.asarray(target, dtype=np.float64)
    check_same_shape(s, t)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("target magnitude must be nonnegative and finite")
    # np.angle(0) == 0, which is exactly the zero-phase convention.
    return t * np.exp(1j * np.angle(s))
