"""Shared numba settings for the scalar kernels."""

from functools import partial

import numba

# Kernels release the GIL so independent simulation runs can share a thread pool,
# and are cached on disk so a fresh interpreter does not pay the compile cost again.
njit = partial(numba.njit, cache=True, nogil=True)
