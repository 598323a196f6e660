#!/usr/bin/env python3
"""
Render the reference piano and violin notes to WAV.

The files are synthetic ground truth for round-trip checks of
analyze -> fit -> simulate -> verify.
"""

import sys
from pathlib import Path

from src.audio.wav import write_wav
from src.config import get_default_sample_rate
from src.data.reference_notes import REFERENCE_NOTES, render_reference_note


def build_reference_notes(output_dir: Path) -> list[Path]:
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, note in REFERENCE_NOTES.items():
        print(f"🎼 Rendering {name}...")
        buffer, gain, _ = render_reference_note(note, get_default_sample_rate())
        path = output_dir / f"{name}_cs4.wav"
        clipped = write_wav(buffer, path)
        print(f"  ✅ {path} ({buffer.duration:.2f} s, gain {gain:.4f}, clipped {clipped})")
        written.append(path)
    return written


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data") / "reference"
    try:
        build_reference_notes(target)
    except Exception as e:
        print(f"❌ Error rendering reference notes: {e}")
        sys.exit(1)
