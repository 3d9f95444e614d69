import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from pydantic import BaseModel, ConfigDict

logger = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = "abelian-integrals"


class GroupResult(BaseModel):
    name: str
    passed: bool
    detail: str

    model_config = ConfigDict(from_attributes=True)


class NormalizationDocument(BaseModel):
    input_digest: str
    seed: int
    ultra_morse: bool
    clause: Optional[str] = None
    diagnosis: str
    critical_points: list[dict[str, Any]] = []
    report: Optional[dict[str, Any]] = None


class BoundsDocument(BaseModel):
    input_digest: str
    n: int
    c_prime: float
    c_doubleprime: float
    ln_A: float
    c_appendix: int
    l: int
    R: float
    entries: dict[str, Optional[float]]
    plain: dict[str, Optional[float]]
    log10: dict[str, Optional[float]]


class SystemManifest(BaseModel):
    input_digest: str
    t0: list[float]
    nu: float
    mu: int
    system: dict[str, Any]
    pl_matrices: list[list[list[int]]]
    pl_residuals: dict[str, Optional[float]]
    audit_passed: bool


class ZeroCountDocument(BaseModel):
    input_digest: str
    region: str
    form: dict[str, Any]
    count: int
    identically_zero: bool
    details: dict[str, Any]
    bound_audit: dict[str, Any]


class VerifyDocument(BaseModel):
    input_digest: str
    groups: list[GroupResult]
    failed: int


def finite(obj):
    """Plain JSON types: numpy scalars unwrapped, complex as [re, im], non-finite floats as None"""
    if isinstance(obj, np.ndarray):
        return finite(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, complex):
        return [finite(obj.real), finite(obj.imag)]
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, Mapping):
        return {str(k): finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [finite(v) for v in obj]
    return obj


class ReportWriter:
    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)

    def _path(self, filename: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / filename

    def write_document(self, name: str, document: BaseModel) -> Path:
        """
        Write document as <name>.json (sorted keys) next to <name>.schema.json
        Args:
            name: base file name
            document: pydantic model instance
        Returns:
            Path of the JSON file
        """
        try:
            path = self._path(f"{name}.json")
            payload = finite(document.model_dump(mode="json"))
            with open(path, "w") as f:
                json.dump(payload, f, sort_keys=True, indent=2, allow_nan=False)
                f.write("\n")
            with open(self._path(f"{name}.schema.json"), "w") as f:
                json.dump(type(document).model_json_schema(), f, sort_keys=True, indent=2)
                f.write("\n")
            logger.info(f"Wrote {path}")
            return path
        except Exception as e:
            logger.error(f"Error writing document {name}: {str(e)}")
            raise

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
        path = self._path(f"{name}.csv")
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(x)) for x in row])
        return path

    def _save(self, fig, name: str) -> Path:
        path = self._path(f"{name}.svg")
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
        logger.info(f"Wrote {path}")
        return path

    def plot_system(self, name: str, values: Sequence[complex], nu: float, paths: Mapping[str, Any]) -> Path:
        """Critical values with their nu-disks and the given t-plane paths"""
        fig, ax = plt.subplots(figsize=(6, 6))
        for v in values:
            ax.add_patch(plt.Circle((v.real, v.imag), nu, fill=False, color="grey", linewidth=0.5))
            ax.plot([v.real], [v.imag], "k.", markersize=6)
        for label, path in sorted(paths.items()):
            ax.plot(path.vertices.real, path.vertices.imag, linewidth=0.8, label=label)
        ax.set_aspect("equal")
        ax.set_xlabel("Re t")
        ax.set_ylabel("Im t")
        if paths:
            ax.legend(fontsize=6, loc="upper right")
        return self._save(fig, name)

    def plot_oval(self, name: str, cycle) -> Path:
        """Real trace (Re x, Re y) of a cycle"""
        fig, ax = plt.subplots(figsize=(5, 5))
        pts = cycle.points
        ax.plot(list(pts[:, 0].real) + [pts[0, 0].real], list(pts[:, 1].real) + [pts[0, 1].real], linewidth=0.8)
        ax.set_aspect("equal")
        ax.set_title(f"H = {cycle.t.real:.6g}")
        return self._save(fig, name)

    def plot_modulus(self, name: str, samples) -> Path:
        """|f| along the real sample points of a SampleSet, log scale"""
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.semilogy(samples.ts.real, [max(abs(v), 1e-300) for v in samples.values], linewidth=0.8)
        ax.set_xlabel("t")
        ax.set_ylabel("|I(t)|")
        return self._save(fig, name)
