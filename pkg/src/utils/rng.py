import hashlib
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np


@dataclass(frozen=True)
class RngSeed:
    """
    A master seed plus a derivation path of labels

    Every (seed, path) pair maps to its own Philox stream. Philox is
    counter-based, so the stream only depends on the 128-bit key, which
    is the BLAKE2b digest of ``"<seed>:<label>/<label>/..."``.
    """

    seed: int
    path: Tuple[str, ...] = field(default_factory=tuple)

    def child(self, *labels) -> "RngSeed":
        return RngSeed(self.seed, self.path + tuple(str(label) for label in labels))

    def key(self) -> np.ndarray:
        message = f"{self.seed & 0xFFFFFFFFFFFFFFFF}:{'/'.join(self.path)}"
        digest = hashlib.blake2b(message.encode("utf-8"), digest_size=16).digest()

        return np.frombuffer(digest, dtype="<u8").copy()

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.key()))

    def as_int(self) -> int:
        """
        A positive 31-bit integer, for libraries that take plain int seeds
        """
        return int(self.key()[0] % (2**31 - 2)) + 1
