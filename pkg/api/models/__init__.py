"""
Data models package for the Schmidt witness toolkit.
Contains Pydantic models for frames, maps, witnesses and certificates.
"""

from .frame_models import SicPovm, MubCollection, FrameDiagnostics
from .map_models import KPositiveMap, WitnessOperator, ProbeResult
from .report_models import (
    CertificateReport,
    CertificationStrategy,
    DistanceBound,
    Evidence,
    MatrixFile,
    SkSample,
    SweepRow,
)

__all__ = [
    'SicPovm', 'MubCollection', 'FrameDiagnostics',
    'KPositiveMap', 'WitnessOperator', 'ProbeResult',
    'CertificateReport', 'CertificationStrategy', 'DistanceBound', 'Evidence',
    'MatrixFile', 'SkSample', 'SweepRow',
]
