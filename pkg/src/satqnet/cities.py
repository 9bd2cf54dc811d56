"""Bundled ground-station city coordinates."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .geometry import GeodeticCoordinate

EXPECTED_CITIES = (
    "Toronto", "New York City", "London", "Singapore", "Sydney", "Auckland",
    "Rio de Janeiro", "Baton Rouge", "Mumbai", "Johannesburg", "Washington DC",
    "Lijiang", "Ngari", "Delingha", "Nanshan", "Xinglong", "Houston",
)


def load_city_database(path: str | Path | None = None) -> dict[str, GeodeticCoordinate]:
    """Load the city coordinate file (the bundled one unless a path is given)."""
    if path is None:
        raw = resources.files("satqnet.data").joinpath("cities.json").read_text()
    else:
        raw = Path(path).read_text()
    data = json.loads(raw)
    return {
        name: GeodeticCoordinate(entry["latitude_deg"], entry["longitude_deg"])
        for name, entry in data["cities"].items()
    }
