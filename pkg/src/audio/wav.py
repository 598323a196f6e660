"""WAV reading and writing with the normalization conventions of the pipeline.

Input: PCM 16-bit or IEEE float-32, mono or stereo (stereo is averaged).
Output: PCM 16-bit mono.
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from src.errors import AudioFormatError, WavParseError
from src.models import AudioBuffer

log = logging.getLogger(__name__)

PCM16_SCALE = 32768.0


def read_wav(path: str | Path) -> AudioBuffer:
    """Read a WAV file into a normalized mono AudioBuffer.

    Args:
        path: Input WAV file.

    Returns:
        AudioBuffer with samples in [-1, 1] and the header's sample rate.

    Raises:
        FileNotFoundError: If the file does not exist.
        AudioFormatError: If the sample format is neither PCM16 nor float-32.
        WavParseError: If the header or chunks are truncated or malformed.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"audio file not found: {path}")

    try:
        sample_rate, data = wavfile.read(path)
    except ValueError as e:
        message = str(e)
        if "format" in message.lower() and "unknown" in message.lower():
            raise AudioFormatError(f"{path}: {message}") from e
        raise WavParseError(f"{path}: {message}") from e
    except (EOFError, struct.error, IndexError) as e:
        raise WavParseError(f"{path}: {e}") from e

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
        clipped = int(np.count_nonzero(np.abs(samples) > 1.0))
        if clipped:
            log.warning("⚠️ %s: %d float samples outside [-1, 1] clipped", path, clipped)
            samples = np.clip(samples, -1.0, 1.0)
    else:
        raise AudioFormatError(
            f"{path}: unsupported sample type {data.dtype} (PCM16 or float-32 only)"
        )

    if samples.ndim == 2:
        samples = samples.mean(axis=1)

    log.debug("read %s: %d samples at %d Hz", path, samples.size, sample_rate)
    return AudioBuffer(samples=samples, sample_rate=int(sample_rate))


def write_wav(buffer: AudioBuffer, path: str | Path) -> int:
    """Write a buffer as 16-bit PCM mono and return the number of clipped samples."""
    samples = np.asarray(buffer.samples, dtype=np.float64)
    clipped = int(np.count_nonzero(np.abs(samples) > 1.0))
    if clipped:
        log.warning("⚠️ %d samples outside [-1, 1] clipped while writing %s", clipped, path)

    words = np.clip(np.round(np.clip(samples, -1.0, 1.0) * PCM16_SCALE), -32768, 32767)
    wavfile.write(Path(path), buffer.sample_rate, words.astype(np.int16))
    log.debug("wrote %s: %d samples at %d Hz", path, samples.size, buffer.sample_rate)
    return clipped
