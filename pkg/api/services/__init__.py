"""
Services package for the Schmidt witness toolkit.
Contains the numerical core: linear algebra, frames, maps, witnesses and certification.
"""

from .frame_store import FrameStore
from .settings import Settings, get_settings

__all__ = ['FrameStore', 'Settings', 'get_settings']
