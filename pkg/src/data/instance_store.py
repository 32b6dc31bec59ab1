import csv
import io
import json
import logging
import os
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.data.models import (
    BoundAuditReport,
    CurveRow,
    EvalReport,
    ExactDistribution,
    MechanismSpec,
    NominationGraph,
    Prediction,
    format_rational,
)
from src.utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)

EVAL_COLUMNS = ["instance_id", "n", "k", "delta_k", "pred_indegree", "eta", "mean", "ci", "ratio"]
CURVE_COLUMNS = ["kind", "k", "rho", "alpha", "alpha_decimal", "beta", "beta_decimal"]


class GraphModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = Field(ge=1)
    edges: List[Tuple[int, int]] = Field(default_factory=list)


class PredictionModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    vertices: List[int] = Field(min_length=1)


class MechanismSpecModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: str
    rho: Optional[str] = None
    k: Optional[int] = None
    mix_weight: Optional[str] = None
    a: Optional["MechanismSpecModel"] = None
    b: Optional["MechanismSpecModel"] = None

    @field_validator("rho", "mix_weight", mode="before")
    @classmethod
    def _rational_as_text(cls, value: Any) -> Any:
        # Integers such as 0 or 1 are accepted alongside "p/q" strings
        if isinstance(value, int) and not isinstance(value, bool):
            return str(value)
        return value


MechanismSpecModel.model_rebuild()


class InstanceModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    graph: GraphModel
    prediction: PredictionModel


class DistributionModel(BaseModel):
    probs: Dict[str, str]


def graph_to_dict(g: NominationGraph) -> Dict[str, Any]:
    return {"n": g.n, "edges": [list(e) for e in g.sorted_edges()]}


def graph_from_dict(data: Dict[str, Any]) -> NominationGraph:
    model = GraphModel.model_validate(data)
    return NominationGraph(model.n, model.edges)


def prediction_to_dict(p: Prediction) -> Dict[str, Any]:
    return {"vertices": list(p.vertices)}


def prediction_from_dict(data: Dict[str, Any]) -> Prediction:
    return Prediction(PredictionModel.model_validate(data).vertices)


def spec_to_dict(spec: MechanismSpec) -> Dict[str, Any]:
    data: Dict[str, Any] = {"kind": spec.kind.value, "k": spec.k}
    if spec.rho is not None:
        data["rho"] = format_rational(spec.rho)
    if spec.mix_weight is not None:
        data["mix_weight"] = format_rational(spec.mix_weight)
        data["a"] = spec_to_dict(spec.a)
        data["b"] = spec_to_dict(spec.b)
    return data


def _spec_from_model(model: MechanismSpecModel) -> MechanismSpec:
    return MechanismSpec(
        kind=model.kind,
        k=model.k,
        rho=model.rho,
        mix_weight=model.mix_weight,
        a=_spec_from_model(model.a) if model.a is not None else None,
        b=_spec_from_model(model.b) if model.b is not None else None,
    )


def spec_from_dict(data: Dict[str, Any]) -> MechanismSpec:
    return _spec_from_model(MechanismSpecModel.model_validate(data))


def distribution_to_dict(d: ExactDistribution) -> Dict[str, Any]:
    return {"probs": {str(v): format_rational(p) for v, p in d.probs.items()}}


def distribution_from_dict(data: Dict[str, Any], k: int = 1) -> ExactDistribution:
    model = DistributionModel.model_validate(data)
    try:
        probs = {int(v): Fraction(p) for v, p in model.probs.items()}
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"invalid distribution entry: {e}")
    return ExactDistribution(probs, k)


def bound_report_to_dict(report: BoundAuditReport) -> Dict[str, Any]:
    def check(c) -> Dict[str, Any]:
        return {"constraint": c.label, "instance": c.graph_index,
                "lhs": format_rational(c.lhs), "rhs": format_rational(c.rhs), "pass": c.passed}

    return {
        "setting": report.setting.value,
        "mechanism": report.spec_label,
        "alpha_hat": format_rational(report.alpha_hat),
        "beta_hat": format_rational(report.beta_hat),
        "variables": {name: format_rational(v) for name, v in sorted(report.variables.items())},
        "instances": [{"index": a.index, "delta_k": a.delta_k, "expected": format_rational(a.expected),
                       "ratio": format_rational(a.ratio), "accurate": a.accurate,
                       "probs": {str(v): format_rational(p) for v, p in a.probs.items()}}
                      for a in report.instances],
        "linkage": [{"variable": c.label, "first": list(c.first), "second": list(c.second),
                     "first_value": format_rational(c.first_value),
                     "second_value": format_rational(c.second_value), "pass": c.equal}
                    for c in report.linkage],
        "connected": dict(sorted(report.connected.items())),
        "constraints": [check(c) for c in report.constraints],
        "region": [check(c) for c in report.region],
        "pass": report.passed,
    }


def eval_report_to_dict(report: EvalReport) -> Dict[str, Any]:
    return {
        "mechanism": report.spec_label,
        "trials": report.trials,
        "seed": report.seed,
        "note": report.note,
        "alpha_hat": report.alpha_hat,
        "beta_hat": report.beta_hat,
        "rows": [{"instance_id": r.instance_id, "n": r.n, "k": r.k, "delta_k": r.delta_k,
                  "pred_indegree": r.pred_indegree, "eta": format_rational(r.eta),
                  "mean": r.mean, "ci": r.ci, "ratio": r.ratio, "accurate": r.accurate}
                 for r in report.rows],
    }


def eval_report_to_csv(report: EvalReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(EVAL_COLUMNS)
    for r in report.rows:
        writer.writerow([r.instance_id, r.n, r.k, r.delta_k, r.pred_indegree, format_rational(r.eta),
                         f"{r.mean:.6f}", f"{r.ci:.6f}", f"{r.ratio:.6f}"])
    return buffer.getvalue()


def curves_to_csv(rows: List[CurveRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for row in rows:
        writer.writerow([row.kind.value, row.k, format_rational(row.rho),
                         format_rational(row.alpha), f"{float(row.alpha):.6f}",
                         format_rational(row.beta), f"{float(row.beta):.6f}"])
    return buffer.getvalue()


def read_json(path: str) -> Any:
    """Parse a UTF-8 JSON file"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise FileNotFoundError(f"File '{path}' not found")
    except json.JSONDecodeError as e:
        raise ValueError(f"File '{path}' is not valid JSON: {e}")


def write_json(path: str, data: Any) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def load_graph(path: str) -> NominationGraph:
    data = read_json(path)
    # Instance files carry the graph under a "graph" key
    if isinstance(data, dict) and "graph" in data:
        data = data["graph"]
    return graph_from_dict(data)


def load_prediction(path: str) -> Prediction:
    data = read_json(path)
    if isinstance(data, dict) and "prediction" in data:
        data = data["prediction"]
    return prediction_from_dict(data)


def load_spec(path: str) -> MechanismSpec:
    return spec_from_dict(read_json(path))


class InstanceStore:
    """Named (graph, prediction) instances kept as JSON files in one directory"""

    def __init__(self, root: Optional[str] = None):
        if root is None:
            root = ConfigManager().get_config("storage").instance_dir
        self.root = root
        os.makedirs(self.root, exist_ok=True)

    def _path(self, name: str) -> str:
        # Check name is a plain file stem
        if not name or os.sep in name or (os.altsep and os.altsep in name) or name.startswith("."):
            raise ValueError(f"instance name {name!r} must be a plain, non-empty file name.")
        return os.path.join(self.root, f"{name}.json")

    def save_instance(self, name: str, g: NominationGraph, p: Prediction) -> str:
        """Write one instance, replacing any previous one with the same name"""
        p.validate_for(g)
        path = self._path(name)
        write_json(path, {"graph": graph_to_dict(g), "prediction": prediction_to_dict(p)})
        logger.debug("saved instance %s to %s", name, path)
        return path

    def get_instance(self, name: str) -> Optional[Tuple[NominationGraph, Prediction]]:
        path = self._path(name)
        if not os.path.exists(path):
            return None
        model = InstanceModel.model_validate(read_json(path))
        g = NominationGraph(model.graph.n, model.graph.edges)
        return g, Prediction(model.prediction.vertices).validate_for(g)

    def list_instances(self) -> List[str]:
        return sorted(f[:-5] for f in os.listdir(self.root) if f.endswith(".json"))

    def load_all(self) -> List[Tuple[str, NominationGraph, Prediction]]:
        """Every stored instance, sorted by name"""
        loaded = []
        for name in self.list_instances():
            g, p = self.get_instance(name)
            loaded.append((name, g, p))
        return loaded

    def delete_instance(self, name: str) -> bool:
        path = self._path(name)
        if not os.path.exists(path):
            return False
        os.remove(path)
        return True
