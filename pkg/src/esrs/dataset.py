"""Dataset document: POIs, prerequisite edges, edge texts, archetypes.

The on-disk form is one JSON document.  Only covering edges are stored;
the closure is derived at load time, so loading always re-validates the
relation.  Trajectory logs and response logs are JSONL sidecar files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .blim import ResponseVector
from .config import EngineConfig
from .errors import DanglingReference, ParseError, UnknownItem
from .lattice import PoiId, SurmiseRelation, build_relation
from .surmise import Trajectory
from .user_model import PoiAttributes, validate_centroids


@dataclass
class Dataset:
    pois: dict[PoiId, PoiAttributes]
    relation: SurmiseRelation
    edge_texts: dict[tuple[PoiId, PoiId], str]
    centroids: dict[str, dict[PoiId, float]]
    config: EngineConfig = field(default_factory=EngineConfig)

    def __post_init__(self):
        if set(self.pois) != set(self.relation.items):
            raise ValueError("relation items and POI ids must match exactly")
        hasse = set(self.relation.hasse)
        for edge in self.edge_texts:
            if edge not in hasse:
                raise ValueError(f"edge text for non-covering edge {edge}")

    def attributes(self) -> dict[PoiId, PoiAttributes]:
        return self.pois


def _attrs_from_dict(raw: Mapping[str, Any]) -> PoiAttributes:
    try:
        return PoiAttributes(
            poi=raw["id"],
            name=raw.get("name", raw["id"]),
            category=tuple(raw.get("category", ())),
            popularity=float(raw.get("popularity", 0.5)),
            review=float(raw.get("review", 0.5)),
            lat=float(raw.get("lat", 0.0)),
            lon=float(raw.get("lon", 0.0)),
            dwell_minutes=float(raw.get("dwell_minutes", 60.0)),
            open_time=raw.get("open"),
            close_time=raw.get("close"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad POI record {raw!r}: {exc}") from exc


def dataset_from_dict(doc: Mapping[str, Any]) -> Dataset:
    if not isinstance(doc, Mapping):
        raise ParseError("dataset document must be a JSON object")
    try:
        poi_records = doc["pois"]
        edge_records = doc.get("hasse_edges", [])
    except KeyError as exc:
        raise ParseError(f"dataset missing required key: {exc}") from exc

    pois: dict[PoiId, PoiAttributes] = {}
    for raw in poi_records:
        attrs = _attrs_from_dict(raw)
        if attrs.poi in pois:
            raise ParseError(f"duplicate POI id {attrs.poi!r}")
        pois[attrs.poi] = attrs

    edges = []
    for record in edge_records:
        if len(record) != 2:
            raise ParseError(f"bad edge record {record!r}")
        p, q = record
        for endpoint in (p, q):
            if endpoint not in pois:
                raise DanglingReference(endpoint, "hasse_edges")
        edges.append((p, q))

    try:
        relation = build_relation(sorted(pois), edges)
    except UnknownItem as exc:  # pragma: no cover - guarded above
        raise DanglingReference(exc.item, "hasse_edges") from exc

    edge_texts: dict[tuple[PoiId, PoiId], str] = {}
    for record in doc.get("edge_texts", []):
        try:
            a, b, text = record["from"], record["to"], record["text"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad edge text record {record!r}: {exc}") from exc
        for endpoint in (a, b):
            if endpoint not in pois:
                raise DanglingReference(endpoint, "edge_texts")
        if (a, b) not in set(relation.hasse):
            raise ParseError(f"edge text for non-covering edge ({a!r}, {b!r})")
        edge_texts[(a, b)] = text

    centroids: dict[str, dict[PoiId, float]] = {}
    for label, vector in doc.get("centroids", {}).items():
        for poi in vector:
            if poi not in pois:
                raise DanglingReference(poi, f"centroid {label!r}")
        centroids[label] = {poi: float(v) for poi, v in vector.items()}
    try:
        validate_centroids(centroids)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc

    config = EngineConfig().merged(doc.get("config", {}))
    return Dataset(pois=pois, relation=relation, edge_texts=edge_texts,
                   centroids=centroids, config=config)


def dataset_to_dict(dataset: Dataset) -> dict[str, Any]:
    """Canonical serialized form: sorted ids, covering edges only."""
    pois = []
    for poi in sorted(dataset.pois):
        a = dataset.pois[poi]
        record: dict[str, Any] = {
            "id": a.poi,
            "name": a.name,
            "category": list(a.category),
            "popularity": a.popularity,
            "review": a.review,
            "lat": a.lat,
            "lon": a.lon,
            "dwell_minutes": a.dwell_minutes,
        }
        if a.open_time is not None:
            record["open"] = a.open_time
        if a.close_time is not None:
            record["close"] = a.close_time
        pois.append(record)
    return {
        "pois": pois,
        "hasse_edges": [list(edge) for edge in sorted(dataset.relation.hasse)],
        "edge_texts": [
            {"from": a, "to": b, "text": dataset.edge_texts[(a, b)]}
            for a, b in sorted(dataset.edge_texts)
        ],
        "centroids": {
            label: dict(sorted(vector.items()))
            for label, vector in sorted(dataset.centroids.items())
        },
        "config": dataset.config.to_dict(),
    }


def load_dataset(path: str | Path) -> Dataset:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read dataset {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"dataset {path!r} is not valid JSON: {exc}") from exc
    return dataset_from_dict(doc)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dataset_to_dict(dataset), indent=2, sort_keys=True) + "\n")


@dataclass
class RejectedLine:
    line_number: int
    reason: str


def ingest_trajectories(path: str | Path) -> tuple[list[Trajectory], list[RejectedLine]]:
    """Parse a JSONL trajectory log; bad lines are rejected with a record.

    Line schema: {"user": str, "visits": [{"poi": str, "ts": iso-timestamp}]}.
    """
    trajectories: list[Trajectory] = []
    rejected: list[RejectedLine] = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read trajectories {path!r}: {exc}") from exc
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            visits = tuple((v["poi"], v["ts"]) for v in raw["visits"])
            trajectories.append(Trajectory(user_id=raw["user"], visits=visits))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            rejected.append(RejectedLine(number, f"malformed line: {exc}"))
        except ValueError as exc:
            rejected.append(RejectedLine(number, str(exc)))
    return trajectories, rejected


def load_response_sequences(path: str | Path) -> list[ResponseVector]:
    """Parse a JSONL response log: {"user": str, "responses": {poi: 0|1}}."""
    sequences: list[ResponseVector] = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read responses {path!r}: {exc}") from exc
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            sequences.append(ResponseVector({k: int(v) for k, v in raw["responses"].items()}))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad response line {number}: {exc}") from exc
    return sequences
