from __future__ import annotations
from typing import Dict

from src.data.reference_notes import REFERENCE_NOTES, ReferenceNote


def get_reference_notes() -> Dict[str, ReferenceNote]:
    return REFERENCE_NOTES
