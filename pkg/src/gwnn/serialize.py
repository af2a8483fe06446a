"""Deterministic .npz writing.

numpy's savez stamps the current time into each zip member header, so two
otherwise identical saves differ in bytes. Checkpoints and caches here must
be bit-identical across runs with the same seed, so this writer pins the
member order, the zip timestamp, and the permission bits, and stores
members uncompressed. The output is a regular .npz that np.load reads.
"""

from __future__ import annotations

import io
import zipfile
from pathlib import Path

import numpy as np

__all__ = ["savez_deterministic"]

_EPOCH = (1980, 1, 1, 0, 0, 0)  # earliest timestamp zip can represent


def savez_deterministic(path, **arrays) -> None:
    path = Path(path)
    with zipfile.ZipFile(path, "w", zipfile.ZIP_STORED) as zf:
        for name in sorted(arrays):
            buf = io.BytesIO()
            np.lib.format.write_array(
                buf, np.asanyarray(arrays[name]), allow_pickle=False
            )
            info = zipfile.ZipInfo(name + ".npy", date_time=_EPOCH)
            info.compress_type = zipfile.ZIP_STORED
            info.external_attr = 0o644 << 16
            zf.writestr(info, buf.getvalue())
