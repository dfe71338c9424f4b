"""
Frame Store for providing verified SIC and MUB frames.

This service:
1. Keeps verified frames in memory, keyed by (kind, d, seed, restarts)
2. Persists them as frame files under the settings cache directory
3. Builds missing frames natively (MUBs in prime d, SIC search for d <= 8)

Searching a SIC fiducial takes seconds in d = 7 or 8, so results are cached
on disk and reloaded (and re-verified) on the next run. MUB sets carry no
search parameters; their key is (kind, d).
"""

import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional

import numpy as np

from api.services import frames
from api.services.errors import FrameError, FrameFileError, FramesUnavailable, OverlapViolation
from api.services.frames import Frame
from api.services.settings import get_settings

logger = logging.getLogger(__name__)

FrameKind = Literal['sic', 'mub', 'auto']


class FrameStore:
    """
    Cache of verified frames.

    Frames live in memory for the lifetime of the store and, when a cache
    directory is configured, as JSON frame files on disk.
    """

    def __init__(self, cache_dir: Optional[Path] = None, sic_restarts: Optional[int] = None):
        """
        Initialize the store.

        Args:
            cache_dir: Directory for frame files (default: settings.cache_dir / 'frames');
                pass a path to isolate a store, e.g. in tests
            sic_restarts: Restart budget for fiducial searches (default: settings)
        """
        settings = get_settings()
        self.cache_dir = Path(cache_dir) if cache_dir is not None else settings.cache_dir / 'frames'
        self.sic_restarts = sic_restarts or settings.sic_restarts
        # In-memory storage: key -> verified frame
        self._frames: Dict[str, Frame] = {}

    def frame_key(self, kind: str, d: int, seed: int = 0) -> str:
        """Cache key; SIC keys include the search seed and restart budget."""
        if kind == 'sic':
            return f"sic-d{d}-seed{seed}-r{self.sic_restarts}"
        return f"{kind}-d{d}"

    def _cache_path(self, key: str) -> Path:
        return self.cache_dir / f"{key}.json"

    def _put(self, key: str, frame: Frame, source: str) -> Frame:
        """
        Store a frame after verifying it.

        Raises:
            OverlapViolation: If the frame fails verification
        """
        diagnostics = frames.verify_frames(frame)
        if not diagnostics.passed:
            raise OverlapViolation(
                f"Refusing to store unverified {frame.kind} frame (d={frame.d}): "
                f"{', '.join(diagnostics.failed)}",
                max_deviation=max(diagnostics.deviations.values())
            )
        self._frames[key] = frame
        logger.debug("Stored %s (%s, digest %s)", key, source, frames.frame_digest(frame)[:12])
        return frame

    def _lookup(self, key: str) -> Optional[Frame]:
        """Frame from memory, else from its cache file, else None."""
        if key in self._frames:
            return self._frames[key]
        path = self._cache_path(key)
        if not path.exists():
            return None
        try:
            frame = frames.load_frame(path)
        except (FrameFileError, FrameError) as e:
            logger.warning("Ignoring cached frame %s: %s", path, e)
            return None
        logger.info("Loaded cached frame %s", path)
        return self._put(key, frame, 'file')

    def _persist(self, key: str, frame: Frame) -> None:
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            frames.save_frame(frame, self._cache_path(key))
        except OSError as e:
            logger.warning("Could not cache %s frame for d=%d: %s", frame.kind, frame.d, e)

    def get_mub(self, d: int) -> Frame:
        """
        Complete MUB set for d, from memory, the cache or the prime construction.

        Raises:
            FramesUnavailable: If d is not prime and nothing is cached
        """
        key = self.frame_key('mub', d)
        frame = self._lookup(key)
        if frame is not None:
            return frame
        if not frames.is_prime(d):
            raise FramesUnavailable(f"No MUB set for composite d={d}; supply a frame file")
        return self._put(key, frames.mub_prime(d), 'native')

    def get_sic(self, d: int, seed: int = 0) -> Frame:
        """
        Weyl-Heisenberg SIC for d, from memory, the cache or a fiducial search.

        Raises:
            FramesUnavailable: If d exceeds the native search range and nothing is cached
            SearchFailed: If the search exhausts its restart budget
        """
        key = self.frame_key('sic', d, seed)
        frame = self._lookup(key)
        if frame is not None:
            return frame
        if d > frames.NATIVE_SIC_MAX_D:
            raise FramesUnavailable(
                f"No cached SIC for d={d}; native search only covers d <= {frames.NATIVE_SIC_MAX_D}. "
                f"Supply a frame file."
            )

        logger.info("Searching SIC fiducial for d=%d (seed %d, %d restarts)", d, seed, self.sic_restarts)
        if d == 1:
            fiducial = np.ones(1, dtype=complex)
        else:
            fiducial = frames.find_sic_fiducial(d, seed=seed, restarts=self.sic_restarts)
        frame = self._put(key, frames.wh_sic_from_fiducial(fiducial), 'search')
        self._persist(key, frame)
        return frame

    def provide(self, d: int, kind: FrameKind = 'auto') -> Frame:
        """
        One frame of the requested kind; 'auto' prefers MUBs for prime d, then SICs.

        Raises:
            FramesUnavailable: If no frame of any allowed kind can be produced
        """
        if kind == 'mub':
            return self.get_mub(d)
        if kind == 'sic':
            return self.get_sic(d)
        if frames.is_prime(d) or self._lookup(self.frame_key('mub', d)) is not None:
            return self.get_mub(d)
        return self.get_sic(d)

    def provide_all(self, d: int) -> List[Frame]:
        """
        Every frame kind available for d: the MUB set, then the SIC.

        A kind that cannot be produced is skipped.

        Raises:
            FramesUnavailable: If neither kind can be produced
        """
        available: List[Frame] = []
        for kind in ('mub', 'sic'):
            try:
                available.append(self.provide(d, kind))
            except FrameError as e:
                logger.info("No %s frame for d=%d: %s", kind, d, e)
        if not available:
            raise FramesUnavailable(f"No MUB or SIC frame available for d={d}; supply frame files")
        return available
