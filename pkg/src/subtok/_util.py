"""Small shared helpers: atomic file writes and seeded RNG derivation."""

from __future__ import annotations

import hashlib
import math
import os
import random
import struct
import tempfile
from contextlib import contextmanager
from typing import IO, Iterator


@contextmanager
def atomic_writer(path: str | os.PathLike[str]) -> Iterator[IO[str]]:
    """Open a text file for writing such that `path` only appears on success.

    Content goes to a temporary file in the same directory and is moved into
    place with os.replace; on any error the temporary file is removed and the
    destination is left untouched.
    """
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=os.path.basename(path) + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            yield handle
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path: str | os.PathLike[str], text: str) -> None:
    with atomic_writer(path) as handle:
        handle.write(text)


def derive_rng(seed: int, epoch: int, ordinal: int) -> random.Random:
    """Deterministic per-(seed, epoch, ordinal) generator.

    Uses a keyed hash rather than Python's salted hash() so streams are
    reproducible across processes, platforms and thread counts.
    """
    key = struct.pack("<qqq", seed, epoch, ordinal)
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "little"))


def log_sum_exp(values: list[float]) -> float:
    """Numerically stable log(sum(exp(v))) over a non-empty list.

    Returns -inf for an empty list (log of an empty sum).
    """
    if not values:
        return -math.inf
    peak = max(values)
    if peak == -math.inf:
        return -math.inf
    return peak + math.log(sum(math.exp(v - peak) for v in values))
