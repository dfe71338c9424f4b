"""
FastAPI Backend for the Schmidt Witness Toolkit.

This API provides endpoints for:
- Frame construction and verification (SIC-POVMs, MUBs)
- Schmidt-number certification of density matrices
- Witness evaluation with distance bounds
- Isotropic-state sweeps
"""

import json
from typing import List, Literal, Optional

from fastapi import FastAPI, File, HTTPException, UploadFile, status
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, ValidationError
import sys
from pathlib import Path

# Add project root to path for imports
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from api.models.frame_models import FrameDiagnostics
from api.models.report_models import (
    CertificateReport,
    CertificationStrategy,
    MatrixFile,
    SweepRow,
    sn_verdict,
)
from api.services import certify, frames, matcore, witness
from api.services.errors import FrameError, FrameFileError, StateValidationError
from api.services.frame_store import FrameStore

API_VERSION = "0.1.0"

### Create FastAPI instance with custom docs and openapi url
app = FastAPI(
    title="Schmidt Witness API",
    description="k-positive maps and Schmidt-number witnesses from SIC-POVMs and MUBs",
    version=API_VERSION,
    docs_url="/api/py/docs",
    openapi_url="/api/py/openapi.json"
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],  # Update this in production
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Global frame store: frames are built or searched once per process
frame_store = FrameStore()


# ============================================================================
# Request/Response Models
# ============================================================================

class HealthResponse(BaseModel):
    """Response model for health check endpoint."""

    status: str = Field(..., description="Service status")
    version: str = Field(..., description="API version")


class ErrorResponse(BaseModel):
    """Error response model."""

    error: dict = Field(..., description="Error details")


class FramesRequest(BaseModel):
    """Request model for frame construction."""

    kind: Literal['sic', 'mub'] = Field(..., description="Frame kind")

    d: int = Field(..., ge=2, le=8, description="Dimension (MUBs need a prime)")


class FramesResponse(BaseModel):
    """Response model for frame construction."""

    digest: str = Field(..., description="Frame digest used as frame reference")
    frame: dict = Field(..., description="Frame-file document")
    diagnostics: FrameDiagnostics = Field(..., description="Verification diagnostics")


class CertifyRequest(BaseModel):
    """Request model for certification."""

    state: MatrixFile = Field(..., description="Bipartite density matrix")

    max_k: Optional[int] = Field(default=None, ge=1, description="Largest order tested (default d-1)")

    seeds: int = Field(default=0, ge=0, le=64, description="Random rotation seeds besides identity")

    upper_samples: int = Field(default=0, ge=0, le=20000, description="S_k samples for the upper bound")


class SweepRequest(BaseModel):
    """Request model for the isotropic sweep."""

    d: int = Field(..., ge=2, le=8, description="Local dimension")

    k: int = Field(..., ge=1, description="Witness order")

    grid: List[float] = Field(..., min_length=1, max_length=1000, description="p values")

    kind: Literal['sic', 'mub'] = Field(default='mub', description="Witness kind")

    seeds: int = Field(default=0, ge=0, le=64, description="Random rotation seeds besides identity")


class SweepResponse(BaseModel):
    """Response model for the isotropic sweep."""

    rows: List[SweepRow] = Field(..., description="One row per grid point")


class WitnessEvaluateRequest(BaseModel):
    """Request model for witness evaluation."""

    state: MatrixFile = Field(..., description="Bipartite density matrix")

    k: int = Field(..., ge=1, description="Witness order")

    kind: Literal['sic', 'mub'] = Field(default='mub', description="Witness kind")

    rotation_seed: int = Field(default=0, ge=0, description="Rotation seed (0 = identity)")


class WitnessEvaluateResponse(BaseModel):
    """Response model for witness evaluation."""

    value: float = Field(..., description="Tr(Wρ)")
    verdict: str = Field(..., description="'SN ≥ k+1' or 'inconclusive'")
    b: float = Field(..., description="Frobenius norm of the traceless part of W")
    distance_lower_bound: float = Field(..., description="max(0, -Tr(Wρ)/b)")
    witness: dict = Field(..., description="Witness description")


# ============================================================================
# Helpers
# ============================================================================

def _http_error(e: Exception) -> HTTPException:
    """Map a domain error to the API error envelope."""
    if isinstance(e, FrameError):
        code, http_status = "FRAME_ERROR", status.HTTP_422_UNPROCESSABLE_ENTITY
    elif isinstance(e, StateValidationError):
        code, http_status = "INVALID_STATE", status.HTTP_400_BAD_REQUEST
    elif isinstance(e, FrameFileError):
        code, http_status = "INVALID_FILE", status.HTTP_400_BAD_REQUEST
    else:
        code, http_status = "INVALID_INPUT", status.HTTP_400_BAD_REQUEST
    return HTTPException(
        status_code=http_status,
        detail={
            "error": {
                "code": code,
                "message": str(e),
                "retry": False
            }
        }
    )


def _processing_error(e: Exception, what: str) -> HTTPException:
    print(f"Error during {what}: {str(e)}")
    return HTTPException(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        detail={
            "error": {
                "code": "PROCESSING_FAILED",
                "message": f"Failed to run {what}: {str(e)}",
                "retry": True
            }
        }
    )


def _run_certification(state: MatrixFile, max_k: Optional[int], seeds: int, upper_samples: int) -> CertificateReport:
    if state.space != 'bipartite':
        raise FrameFileError("state must declare space 'bipartite'")
    strategy = CertificationStrategy.with_seed_count(seeds, upper_samples=upper_samples)
    return certify.certify_schmidt_number(state.to_matrix(), max_k, strategy, store=frame_store)


# ============================================================================
# API Endpoints
# ============================================================================

@app.get(
    "/api/py/health",
    response_model=HealthResponse,
    tags=["Health"],
    summary="Health check endpoint"
)
async def health_check():
    """
    Check if the API is running and healthy.

    Returns service status and version information.
    """
    return {
        "status": "healthy",
        "version": API_VERSION
    }


@app.post(
    "/api/py/frames",
    response_model=FramesResponse,
    tags=["Frames"],
    summary="Build and verify a SIC or MUB frame",
    responses={
        422: {"model": ErrorResponse, "description": "Frame cannot be built"}
    }
)
def build_frames(request: FramesRequest):
    """
    Build (or fetch from the frame cache) a verified frame.

    - **mub**: complete set of d+1 MUBs, prime d only
    - **sic**: Weyl-Heisenberg SIC from a numerical fiducial search
    """
    try:
        frame = frame_store.provide(request.d, request.kind)
        return {
            "digest": frames.frame_digest(frame),
            "frame": frames.frame_to_json(frame),
            "diagnostics": frames.verify_frames(frame),
        }
    except ValueError as e:
        raise _http_error(e)
    except Exception as e:
        raise _processing_error(e, "frame construction")


@app.post(
    "/api/py/certify",
    response_model=CertificateReport,
    tags=["Certification"],
    summary="Certify the Schmidt number of a density matrix",
    responses={
        400: {"model": ErrorResponse, "description": "Invalid state"},
        422: {"model": ErrorResponse, "description": "No frames for this dimension"}
    }
)
def certify_state(request: CertifyRequest):
    """
    Run the fidelity test, witnesses and k-map spectra for k = 1..max_k.

    **Returns:** a CertificateReport with every evidence cell, the final
    bound SN ≥ n and distance bounds per k.
    """
    try:
        return _run_certification(request.state, request.max_k, request.seeds, request.upper_samples)
    except ValueError as e:
        raise _http_error(e)
    except Exception as e:
        raise _processing_error(e, "certification")


@app.post(
    "/api/py/certify/upload",
    response_model=CertificateReport,
    tags=["Certification"],
    summary="Certify a density matrix uploaded as a MatrixFile",
    responses={
        400: {"model": ErrorResponse, "description": "Invalid file or state"},
        422: {"model": ErrorResponse, "description": "No frames for this dimension"}
    }
)
async def certify_upload(
    file: UploadFile = File(...),
    max_k: Optional[int] = None,
    seeds: int = 0
):
    """
    Same as /api/py/certify with the state read from an uploaded JSON file.
    """
    content = await file.read()

    # Validate file size (max 10MB)
    max_size = 10 * 1024 * 1024
    if len(content) > max_size:
        raise _http_error(FrameFileError("File too large. Maximum size: 10MB", file.filename))

    try:
        state = MatrixFile.model_validate(json.loads(content))
    except (json.JSONDecodeError, UnicodeDecodeError, ValidationError) as e:
        raise _http_error(FrameFileError(f"malformed matrix file: {e}", file.filename))

    try:
        return _run_certification(state, max_k, seeds, 0)
    except ValueError as e:
        raise _http_error(e)
    except Exception as e:
        raise _processing_error(e, "certification")


@app.post(
    "/api/py/sweep",
    response_model=SweepResponse,
    tags=["Certification"],
    summary="Isotropic-state sweep",
    responses={
        400: {"model": ErrorResponse, "description": "Invalid grid or order"},
        422: {"model": ErrorResponse, "description": "No frames for this dimension"}
    }
)
def sweep(request: SweepRequest):
    """
    Fidelity and witness verdicts for p·Φ + (1-p)·I/d² over a grid of p.
    """
    try:
        frame = frame_store.provide(request.d, request.kind)
        seeds = [0] + list(range(1, request.seeds + 1))
        rows = certify.isotropic_sweep(request.d, request.k, request.grid, frame, seeds)
        return {"rows": rows}
    except ValueError as e:
        raise _http_error(e)
    except Exception as e:
        raise _processing_error(e, "sweep")


@app.post(
    "/api/py/witness/evaluate",
    response_model=WitnessEvaluateResponse,
    tags=["Witnesses"],
    summary="Evaluate a witness on a state",
    responses={
        400: {"model": ErrorResponse, "description": "Invalid state or order"},
        422: {"model": ErrorResponse, "description": "No frames for this dimension"}
    }
)
def evaluate_witness(request: WitnessEvaluateRequest):
    """
    Tr(Wρ) for the witness of order k, with the distance lower bound.
    """
    try:
        rho = request.state.to_matrix()
        d = certify.local_dimension(rho)
        rho = matcore.validate_density(rho, dim=d * d)
        frame = frame_store.provide(d, request.kind)
        w = witness.seeded_witness(frame, request.k, request.rotation_seed)
        value = witness.evaluate(w, rho)
        return {
            "value": value,
            "verdict": sn_verdict(request.k, value < -certify.SLACK),
            "b": witness.frobenius_b(w),
            "distance_lower_bound": certify.witness_distance_bound(rho, w),
            "witness": w.to_json(),
        }
    except ValueError as e:
        raise _http_error(e)
    except Exception as e:
        raise _processing_error(e, "witness evaluation")
