"""File formats: unitary/state files, JSON reports and the study CSV.

Unitary and state files share one JSON layout::

    {"m": 3, "n": 4, "data": [[re, im], ...]}

with ``(m*n)**2`` row-major entries for a unitary and ``m*n`` entries for a
state. Floats are written with Python's shortest round-trip repr, so
amplitudes survive a save/load cycle bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .overlap import CertificationReport, OverlapEstimate, UnitaryGate
from .states import BipartiteDims, ProductPair, PureState

SCHEMA_VERSION = "1.0"
CSV_HEADER = ("index", "sub_seed", "lambda", "verdict")


class FormatError(ValueError):
    pass


def encode_complex(v) -> list[list[float]]:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in v]


def decode_complex(data) -> np.ndarray:
    try:
        arr = np.array(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"data must be a list of [re, im] pairs: {exc}") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FormatError("data must be a list of [re, im] pairs")
    if not np.all(np.isfinite(arr)):
        raise FormatError("data contains non-finite numbers")
    return arr[:, 0] + 1j * arr[:, 1]


def _read_header(doc) -> tuple[BipartiteDims, np.ndarray]:
    if not isinstance(doc, dict) or not {"m", "n", "data"} <= doc.keys():
        raise FormatError("file must be an object with keys m, n, data")
    try:
        dims = BipartiteDims(doc["m"], doc["n"])
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    return dims, decode_complex(doc["data"])


def dump_matrix_doc(matrix, dims: BipartiteDims) -> dict:
    return {"m": dims.m, "n": dims.n, "data": encode_complex(matrix)}


def parse_unitary(doc) -> UnitaryGate:
    dims, flat = _read_header(doc)
    k = dims.total
    if flat.size != k * k:
        raise FormatError(f"expected {k * k} entries for a {k}x{k} unitary, got {flat.size}")
    M = flat.reshape(k, k)
    try:
        return UnitaryGate(M, dims)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def parse_state(doc) -> PureState:
    dims, flat = _read_header(doc)
    if flat.size != dims.total:
        raise FormatError(f"expected {dims.total} amplitudes, got {flat.size}")
    try:
        return PureState(flat, dims)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def _load_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def load_unitary(path) -> UnitaryGate:
    return parse_unitary(_load_json(path))


def load_state(path) -> PureState:
    return parse_state(_load_json(path))


def save_unitary(path, gate: UnitaryGate) -> None:
    Path(path).write_text(json.dumps(dump_matrix_doc(gate.matrix, gate.dims)) + "\n")


def save_state(path, state: PureState) -> None:
    Path(path).write_text(json.dumps(dump_matrix_doc(state.amplitudes, state.dims)) + "\n")


def pair_to_dict(pair: ProductPair) -> dict:
    return {"left": encode_complex(pair.left), "right": encode_complex(pair.right)}


def pair_from_dict(d: dict) -> ProductPair:
    return ProductPair(decode_complex(d["left"]), decode_complex(d["right"]))


def estimate_to_dict(est: OverlapEstimate) -> dict:
    return {
        "lambda": est.overlap,
        "input_witness": pair_to_dict(est.input_witness),
        "output_witness": pair_to_dict(est.output_witness),
        "iterations": est.iterations,
        "restarts_used": est.restarts_used,
        "restarts_converged": est.restarts_converged,
        "converged": est.converged,
    }


def certification_to_dict(rep: CertificationReport) -> dict:
    d = {"verdict": rep.verdict.value}
    d.update(estimate_to_dict(rep.estimate))
    d["min_geometric_entanglement"] = rep.min_geometric_entanglement
    d["entropy_at_witness_bits"] = rep.entropy_at_witness
    d["output_schmidt_coefficients"] = [float(x) for x in rep.output_schmidt]
    return d


@dataclass
class Report:
    command: dict
    config: dict
    result: dict
    wall_time_ms: float | None = None
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            "config": self.config,
            "result": self.result,
            "wall_time_ms": self.wall_time_ms,
        }

    def emit(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Report":
        doc = json.loads(text)
        return cls(
            command=doc["command"],
            config=doc["config"],
            result=doc["result"],
            wall_time_ms=doc["wall_time_ms"],
            schema_version=doc["schema_version"],
        )


def report_schema() -> dict:
    text = resources.files("entangler").joinpath("schemas/report.schema.json").read_text()
    return json.loads(text)


def study_csv(rows) -> str:
    """CSV text with header ``index,sub_seed,lambda,verdict``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for index, sub_seed, lam, verdict in rows:
        writer.writerow([index, sub_seed, repr(float(lam)), verdict])
    return buf.getvalue()


def parse_study_csv(text: str) -> list[tuple[int, int, float, str]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise FormatError(f"unexpected CSV header {header}")
    return [(int(i), int(s), float(lam), v) for i, s, lam, v in reader]
