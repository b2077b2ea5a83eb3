from __future__ import annotations

import hashlib
import logging
from functools import cached_property
from importlib import resources
from pathlib import Path

from .arith import prime_powers_between

logger = logging.getLogger(__name__)

# sha256 of each shipped data file; any edit to a fixture must update this table.
PINNED_HASHES: dict[str, str] = {
    "cubic_146.txt": "982d0caaba40d5b1187d701e748d77a34c0ba995bce1bc515ec1ae0b6f2e2fa4",
    "cubic_82.txt": "98e6f95114b36b98b9d52384e93366304390f810ad2bf667458088d84fd1642a",
    "e4_added.txt": "4a4e6fe380da03fa28fec7f463067b45fb9258bb3d2966fb7a12f7754b6bcf9b",
    "e4_excluded.txt": "79a9c87c3b8ff8bb791896b6a9146d72b50aa87d6c5276247e1f03253ffb0b9d",
    "line3_exceptions.txt": "aa71e06cad95bed6cbcb8396a8c47e48e895e25eff1c3760e6b3c300da8d1de8",
    "quartic_gl.txt": "fd634fad9719349b1fa4c7892bfb7978786d626b580dc06c9facf099bedd9f71",
    "quartic_gt.txt": "1ffd314de3fb25da6996aed62f7addacf84e474669399a4145762b544a68ad57",
}

E4_SMALL_RANGE = 9620
LINE_THRESHOLD = 200
LINE_VERIFIED = frozenset({239, 241, 243, 251, 257, 577})
TRANSLATE_THRESHOLD = 23000


class FixtureError(RuntimeError):
    """Raised when a fixture file is missing, malformed or does not match its pinned hash."""


def default_directory() -> Path:
    return Path(str(resources.files("primline") / "data"))


class FixtureSet:
    """Hash-pinned integer lists shipped with the package, plus the sets derived from them."""

    def __init__(self, directory: Path | None = None) -> None:
        self.directory = directory or default_directory()
        self.hashes: dict[str, str] = {}

    def load(self, name: str) -> list[int]:
        path = self.directory / name
        if not path.exists():
            raise FixtureError(f"fixture {path} not found")
        raw = path.read_bytes()
        digest = hashlib.sha256(raw).hexdigest()
        pinned = PINNED_HASHES.get(name)
        if pinned is not None and digest != pinned:
            raise FixtureError(f"fixture {path} has sha256 {digest}, expected {pinned}")
        try:
            values = [int(line) for line in raw.decode().split() if line]
        except ValueError as exc:
            raise FixtureError(f"fixture {path} is not a list of integers") from exc
        if values != sorted(set(values)):
            raise FixtureError(f"fixture {path} is not sorted and duplicate free")
        if name not in self.hashes:
            logger.warning("fixture %s sha256=%s", name, digest)
        self.hashes[name] = digest
        return values

    def digest(self) -> str:
        """One hash over every pinned fixture, used to tie checkpoints to their inputs."""
        for name in PINNED_HASHES:
            self.load(name)
        joined = "\n".join(f"{name}:{self.hashes[name]}" for name in sorted(self.hashes))
        return hashlib.sha256(joined.encode()).hexdigest()

    @cached_property
    def cubic_146(self) -> list[int]:
        return self.load("cubic_146.txt")

    @cached_property
    def cubic_82(self) -> list[int]:
        return self.load("cubic_82.txt")

    @cached_property
    def line3_exceptions(self) -> list[int]:
        return self.load("line3_exceptions.txt")

    @cached_property
    def quartic_line_exceptions(self) -> list[int]:
        return self.load("quartic_gl.txt")

    @cached_property
    def quartic_translate_exceptions(self) -> list[int]:
        return self.load("quartic_gt.txt")

    @cached_property
    def e4(self) -> list[int]:
        """Prime powers up to 9620, minus the listed exclusions, plus the listed additions."""
        excluded = set(self.load("e4_excluded.txt"))
        added = self.load("e4_added.txt")
        base = [pp.q for pp in prime_powers_between(2, E4_SMALL_RANGE)]
        if not excluded <= set(base):
            raise FixtureError("e4 exclusions contain values that are not small prime powers")
        return sorted({q for q in base if q not in excluded} | set(added))

    @cached_property
    def e_line(self) -> list[int]:
        return [q for q in self.e4 if q > LINE_THRESHOLD and q not in LINE_VERIFIED]

    @cached_property
    def e_translate(self) -> list[int]:
        return [q for q in self.e4 if q > TRANSLATE_THRESHOLD]
