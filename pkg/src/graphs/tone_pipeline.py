"""Tone pipeline workflow using LangGraph: analyze -> fit -> simulate -> verify."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from langgraph.graph import END, START, StateGraph
from pydantic import BaseModel, ConfigDict, Field

from src.artifacts import EnvelopeArtifact, SpectralArtifact, write_json, write_lines, write_trace
from src.audio.wav import read_wav, write_wav
from src.config import get_default_sample_rate, get_partial_count
from src.errors import ToneBifError
from src.models import AudioBuffer, ControllerModel, VerificationReport
from src.stages import (
    SimulationResult,
    analyze_stage,
    envelope_stage,
    fit_stage,
    simulate_stage,
    verify_stage,
)

log = logging.getLogger(__name__)


class TonePipelineState(BaseModel):
    """State carried between pipeline nodes."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    input_path: str
    outdir: str
    partials: Optional[int] = None
    np_samples: Optional[int] = None
    epsilon: Optional[float] = None
    full: bool = False
    sample_rate: Optional[int] = None

    buffer: Optional[AudioBuffer] = None
    spectral: Optional[SpectralArtifact] = None
    envelope: Optional[EnvelopeArtifact] = None
    model: Optional[ControllerModel] = None
    simulation: Optional[SimulationResult] = None
    verification: Optional[VerificationReport] = None

    artifacts: Dict[str, str] = Field(default_factory=dict)
    error: Optional[str] = None
    exit_code: int = 0

    def __getitem__(self, key):
        """Allow dictionary-style access for LangGraph compatibility."""
        return getattr(self, key)

    def __setitem__(self, key, value):
        """Allow dictionary-style assignment for LangGraph compatibility."""
        setattr(self, key, value)

    def get(self, key, default=None):
        """Allow .get() method for LangGraph compatibility."""
        return getattr(self, key, default)


def _out(state: TonePipelineState, name: str) -> Path:
    return Path(state["outdir"]) / name


def _failure(stage: str, e: Exception) -> Dict[str, Any]:
    code = e.exit_code if isinstance(e, ToneBifError) else 2
    log.error("❌ %s failed: %s", stage, e)
    return {"error": f"{stage}: {e}", "exit_code": code}


def analyze_node(state: TonePipelineState) -> Dict[str, Any]:
    """Read the note, detect partials and segment its envelope; envelope.json waits for the fit."""
    try:
        log.info("🔍 analyzing %s", state["input_path"])
        buffer = read_wav(state["input_path"])
        spectral = analyze_stage(buffer, n=state["partials"], source=state["input_path"])
        envelope = envelope_stage(
            buffer,
            state["np_samples"],
            fundamental=spectral.peaks[0].frequency,
            source=state["input_path"],
        )
        artifacts = dict(state["artifacts"])
        artifacts["spectral"] = str(write_json(spectral, _out(state, "spectral.json")))
        return {"buffer": buffer, "spectral": spectral, "envelope": envelope, "artifacts": artifacts}
    except (ToneBifError, OSError) as e:
        return _failure("analyze", e)


def fit_node(state: TonePipelineState) -> Dict[str, Any]:
    try:
        model = fit_stage(state["spectral"], state["envelope"], epsilon=state["epsilon"])
        artifacts = dict(state["artifacts"])
        artifacts["model"] = str(write_json(model, _out(state, "model.json")))
        envelope = state["envelope"].model_copy(update={"plan": model.plan})
        artifacts["envelope"] = str(write_json(envelope, _out(state, "envelope.json")))
        log.info("✅ fit: %d schedule steps", len(model.schedule.steps))
        return {"model": model, "envelope": envelope, "artifacts": artifacts}
    except (ToneBifError, OSError) as e:
        return _failure("fit", e)


def simulate_node(state: TonePipelineState) -> Dict[str, Any]:
    """Integrate the model (full system when requested) and write audio, trace and report."""
    try:
        rate = state["sample_rate"] or state["buffer"].sample_rate or get_default_sample_rate()
        result = simulate_stage(state["model"], rate, full=state["full"])
        artifacts = dict(state["artifacts"])
        wav_path = _out(state, "out.wav")
        write_wav(result.buffer, wav_path)
        artifacts["audio"] = str(wav_path)
        artifacts["trace"] = str(
            write_trace(
                _out(state, "trace.csv"),
                series=result.series,
                trajectory=result.trajectory,
                spectral=state["model"].spectral,
            )
        )
        artifacts["report"] = str(write_json(result.report, _out(state, "report.json")))
        write_lines(result.report.lines, _out(state, "report.txt"))
        return {"simulation": result, "artifacts": artifacts}
    except (ToneBifError, OSError) as e:
        return _failure("simulate", e)


def verify_node(state: TonePipelineState) -> Dict[str, Any]:
    try:
        n = state["model"].n if state["model"] is not None else get_partial_count()
        report = verify_stage(state["buffer"], state["simulation"].buffer, n, model=state["model"])
        artifacts = dict(state["artifacts"])
        artifacts["verify"] = str(write_json(report, _out(state, "verify.json")))
        return {"verification": report, "artifacts": artifacts}
    except (ToneBifError, OSError) as e:
        return _failure("verify", e)


def finalize_node(state: TonePipelineState) -> Dict[str, Any]:
    report = state["verification"]
    if report is not None and report.warning:
        log.warning("⚠️ %s", report.warning)
    log.info("✅ pipeline finished: %s", ", ".join(sorted(state["artifacts"])))
    return {"exit_code": 0}


def failed_node(state: TonePipelineState) -> Dict[str, Any]:
    log.error("❌ pipeline stopped (exit %d): %s", state["exit_code"], state["error"])
    return {}


def route_after_stage(state: TonePipelineState) -> Literal["ok", "failed"]:
    return "failed" if state.get("error") else "ok"


def create_tone_pipeline_graph():
    """Create the tone pipeline workflow graph."""
    graph = StateGraph(TonePipelineState)

    graph.add_node("analyze", analyze_node)
    graph.add_node("fit", fit_node)
    graph.add_node("simulate", simulate_node)
    graph.add_node("verify", verify_node)
    graph.add_node("finalize", finalize_node)
    graph.add_node("failed", failed_node)

    graph.add_edge(START, "analyze")
    graph.add_conditional_edges("analyze", route_after_stage, {"ok": "fit", "failed": "failed"})
    graph.add_conditional_edges("fit", route_after_stage, {"ok": "simulate", "failed": "failed"})
    graph.add_conditional_edges("simulate", route_after_stage, {"ok": "verify", "failed": "failed"})
    graph.add_conditional_edges("verify", route_after_stage, {"ok": "finalize", "failed": "failed"})
    graph.add_edge("finalize", END)
    graph.add_edge("failed", END)

    return graph.compile()


def run_tone_pipeline(
    input_path: str,
    outdir: str,
    partials: Optional[int] = None,
    np_samples: Optional[int] = None,
    epsilon: Optional[float] = None,
    full: bool = False,
    sample_rate: Optional[int] = None,
) -> TonePipelineState:
    """Run the whole pipeline on one note and return the final state."""
    Path(outdir).mkdir(parents=True, exist_ok=True)
    initial = TonePipelineState(
        input_path=str(input_path),
        outdir=str(outdir),
        partials=partials,
        np_samples=np_samples,
        epsilon=epsilon,
        full=full,
        sample_rate=sample_rate,
    )
    log.info("🚀 starting tone pipeline for %s", input_path)
    final = create_tone_pipeline_graph().invoke(initial)
    return TonePipelineState.model_validate(final) if isinstance(final, dict) else final
