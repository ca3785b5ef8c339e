"""Weighted bipartite instances with a fixed online arrival order, and their JSON form."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class Instance:
    n_offline: int
    arrivals: list[list[tuple[int, float]]]
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for j, arrival in enumerate(self.arrivals):
            seen = set()
            for i, w in arrival:
                if not 0 <= i < self.n_offline:
                    raise ValueError(f"arrival {j}: offline id {i} out of range")
                if i in seen:
                    raise ValueError(f"arrival {j}: duplicate edge to offline vertex {i}")
                if not (math.isfinite(w) and w >= 0):
                    raise ValueError(f"arrival {j}: weight {w} is not finite and nonnegative")
                seen.add(i)

    @property
    def n_online(self) -> int:
        return len(self.arrivals)

    def is_unweighted(self) -> bool:
        return all(w == 1 for arrival in self.arrivals for _, w in arrival)

    def neighbors(self, j: int) -> list[int]:
        return [i for i, w in self.arrivals[j] if w > 0]

    def weight_dict(self, j: int) -> dict[int, float]:
        return dict(self.arrivals[j])

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "n_offline": self.n_offline,
            "arrivals": [[[i, w] for i, w in arrival] for arrival in self.arrivals],
        }
        if self.metadata:
            doc["metadata"] = self.metadata
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        doc = json.loads(text)
        arrivals = [[(int(i), w) for i, w in arrival] for arrival in doc["arrivals"]]
        return cls(int(doc["n_offline"]), arrivals, doc.get("name", ""), doc.get("metadata", {}))

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8", newline="\n")

    @classmethod
    def read(cls, path: str | Path) -> "Instance":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))
