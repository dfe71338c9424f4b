"""
Certification data models.

This module defines:
- MatrixFile: JSON matrix input (state files)
- SkSample: random state of bounded Schmidt number
- CertificationStrategy: frames, rotation seeds and sampler settings
- Evidence / DistanceBound / CertificateReport: certification output
- SweepRow: one row of an isotropic sweep table
"""

from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from api.models.frame_models import MubCollection, SicPovm
from api.services.errors import FrameFileError

REPORT_VERSION = "report_v1"

Method = Literal['fidelity', 'sic-witness', 'mub-witness', 'kmap-spectrum']
METHOD_ORDER = ('fidelity', 'sic-witness', 'mub-witness', 'kmap-spectrum')


def sn_verdict(k: int, certified: bool) -> str:
    return f"SN ≥ {k + 1}" if certified else "inconclusive"


class MatrixFile(BaseModel):
    """
    Matrix input document.

    Real and imaginary parts are row-major, either nested (rows of entries)
    or flat. `d` is the local dimension for bipartite inputs.
    """

    d: int = Field(..., ge=1, description="Dimension (local dimension when bipartite)")

    space: Literal['single', 'bipartite'] = Field(
        default='bipartite',
        description="'single' for C^d, 'bipartite' for C^d ⊗ C^d"
    )

    re: list = Field(..., description="Row-major real parts")

    im: Optional[list] = Field(default=None, description="Row-major imaginary parts (default 0)")

    class Config:
        json_schema_extra = {
            "example": {
                "d": 2,
                "space": "bipartite",
                "re": [[0.5, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [0.5, 0, 0, 0.5]],
                "im": [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
            }
        }

    @property
    def side(self) -> int:
        return self.d if self.space == 'single' else self.d * self.d

    def _part(self, values: Optional[list], name: str) -> np.ndarray:
        side = self.side
        if values is None:
            return np.zeros((side, side))
        try:
            array = np.asarray(values, dtype=float)
        except (TypeError, ValueError) as e:
            raise FrameFileError(f"'{name}' must hold numbers: {e}")
        if array.size != side * side or array.ndim not in (1, 2):
            raise FrameFileError(f"'{name}' must hold {side}x{side} entries (got shape {array.shape})")
        return array.reshape(side, side)

    def to_matrix(self) -> np.ndarray:
        """
        Assemble the complex matrix.

        Raises:
            FrameFileError: If a part has the wrong number of entries
        """
        return self._part(self.re, 're') + 1j * self._part(self.im, 'im')

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, d: int, space: str = 'bipartite') -> "MatrixFile":
        matrix = np.asarray(matrix, dtype=complex)
        return cls(d=d, space=space, re=matrix.real.tolist(), im=matrix.imag.tolist())


class SkSample(BaseModel):
    """Mixture of pure states of Schmidt rank <= k (a state in S_k)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    d: int = Field(..., description="Local dimension")

    k: int = Field(..., description="Schmidt-rank bound of every component")

    weights: np.ndarray = Field(..., description="Mixture weights, nonnegative, sum 1")

    components: np.ndarray = Field(..., description="Pure components, shape (m, d²)")

    rho: np.ndarray = Field(..., description="Σ_i w_i |ψ_i⟩⟨ψ_i|")


class CertificationStrategy(BaseModel):
    """Which evidence to gather and with which seeds."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    rotation_seeds: List[int] = Field(
        default_factory=lambda: [0],
        description="Rotation seeds per witness (0 = identity rotations)"
    )

    frames: List[Union[SicPovm, MubCollection]] = Field(
        default_factory=list,
        description="Frames to build maps from; empty means provision automatically"
    )

    auto_frames: bool = Field(
        default=True,
        description="Provision frames (MUBs for prime d, SIC search for d <= 8) when none are given"
    )

    upper_samples: int = Field(
        default=0,
        ge=0,
        description="S_k samples for the sampled distance upper bound (0 skips it)"
    )

    components: Optional[int] = Field(
        default=None,
        ge=1,
        description="Pure components per S_k sample (default 2d)"
    )

    sampler_seed: int = Field(default=1, ge=0, description="Seed of the S_k sampler")

    @classmethod
    def with_seed_count(cls, count: int, **kwargs) -> "CertificationStrategy":
        """Identity rotations plus `count` random rotation seeds 1..count."""
        return cls(rotation_seeds=[0] + list(range(1, count + 1)), **kwargs)


class Evidence(BaseModel):
    """One (k, method, frame, seed) cell of a certification."""

    k: int = Field(..., description="Order tested: a positive verdict certifies SN ≥ k+1")

    method: Method = Field(..., description="Evidence method")

    frame: Optional[str] = Field(default=None, description="Frame digest (witness and map methods)")

    rotation_seed: Optional[int] = Field(default=None, description="Rotation seed used")

    value: float = Field(..., description="Fidelity, Tr(Wρ) or min eigenvalue of (I⊗Λ)(ρ)")

    threshold: float = Field(..., description="Value the verdict is taken against")

    certified: bool = Field(..., description="Whether this cell certifies SN ≥ k+1")

    verdict: str = Field(..., description="'SN ≥ k+1' or 'inconclusive'")


class DistanceBound(BaseModel):
    """Bounds on the Frobenius distance from ρ to S_k."""

    k: int

    lower: float = Field(..., description="Witness-based lower bound")

    upper: Optional[float] = Field(default=None, description="Sampled upper bound, when requested")


class CertificateReport(BaseModel):
    """Schmidt-number certificate for one density operator."""

    version: str = Field(default=REPORT_VERSION, description="Report schema version")

    d: int = Field(..., description="Local dimension")

    input_digest: str = Field(..., description="SHA-256 of the input matrix")

    rng: str = Field(..., description="Random generator algorithm")

    max_k: int = Field(..., description="Largest order tested")

    rotation_seeds: List[int] = Field(default_factory=list)

    frames: List[str] = Field(default_factory=list, description="'kind:digest' of every frame used")

    evidence: List[Evidence] = Field(default_factory=list)

    fidelity: float = Field(..., description="Tr(ρ Φ_norm)")

    final_bound: int = Field(..., description="Certified SN ≥ final_bound")

    verdict: str = Field(..., description="Human-readable final verdict")

    distance_bounds: List[DistanceBound] = Field(default_factory=list)

    class Config:
        json_schema_extra = {
            "example": {
                "version": REPORT_VERSION,
                "d": 3,
                "input_digest": "9f2c...",
                "rng": "philox-4x64-v1",
                "max_k": 2,
                "rotation_seeds": [0],
                "frames": ["mub:51d0..."],
                "evidence": [{
                    "k": 2, "method": "fidelity", "frame": None, "rotation_seed": None,
                    "value": 1.0, "threshold": 0.6666666666666666,
                    "certified": True, "verdict": "SN ≥ 3"
                }],
                "fidelity": 1.0,
                "final_bound": 3,
                "verdict": "SN ≥ 3",
                "distance_bounds": [{"k": 2, "lower": 0.2973, "upper": None}]
            }
        }


class SweepRow(BaseModel):
    """One grid point of an isotropic-state sweep."""

    p: float

    fidelity: float

    fidelity_verdict: str

    witness_value: float = Field(..., description="Most negative value over rotation seeds")

    witness_verdict: str

    distance_lower_bound: float
