"""JSON formats for measures and couplings.

Measure: {"sites": n, "label_bound": N, "weights": {"1,0": "1/2", ...}}
Coupling: same, with "first"/"second" spaces and "x|y" pair keys.
"""

import json
import logging
from typing import Any, Dict

from ..errors import InputError
from .coupling import Coupling
from .measure import Configuration, FiniteMeasure, Space, as_fraction, format_fraction

logger = logging.getLogger(__name__)


def format_configuration(x: Configuration) -> str:
    return ",".join(str(label) for label in x)


def parse_configuration(text: str) -> Configuration:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as e:
        raise InputError(f"Malformed configuration key: {text!r}") from e


def measure_to_dict(mu: FiniteMeasure) -> Dict[str, Any]:
    return {
        "sites": mu.sites,
        "label_bound": mu.label_bound,
        "weights": {format_configuration(x): format_fraction(w) for x, w in mu.items()},
    }


def measure_from_dict(data: Dict[str, Any]) -> FiniteMeasure:
    try:
        space = Space(int(data["sites"]), int(data["label_bound"]))
        weights = {parse_configuration(k): as_fraction(v) for k, v in data["weights"].items()}
    except (KeyError, TypeError, AttributeError) as e:
        raise InputError(f"Malformed measure: {e}") from e
    return FiniteMeasure(space, weights)


def coupling_to_dict(c: Coupling) -> Dict[str, Any]:
    return {
        "first": {"sites": c.first.sites, "label_bound": c.first.label_bound},
        "second": {"sites": c.second.sites, "label_bound": c.second.label_bound},
        "weights": {
            f"{format_configuration(x)}|{format_configuration(y)}": format_fraction(w)
            for (x, y), w in c.items()
        },
    }


def coupling_from_dict(data: Dict[str, Any]) -> Coupling:
    try:
        first = Space(int(data["first"]["sites"]), int(data["first"]["label_bound"]))
        second = Space(int(data["second"]["sites"]), int(data["second"]["label_bound"]))
        weights = {}
        for key, value in data["weights"].items():
            left, sep, right = key.partition("|")
            if not sep:
                raise InputError(f"Malformed pair key: {key!r}")
            weights[(parse_configuration(left), parse_configuration(right))] = as_fraction(value)
    except (KeyError, TypeError, AttributeError) as e:
        raise InputError(f"Malformed coupling: {e}") from e
    return Coupling(first, second, weights)


def save_measure(mu: FiniteMeasure, path: str) -> str:
    with open(path, "w") as f:
        json.dump(measure_to_dict(mu), f, indent=2, sort_keys=True)
    logger.info(f"Saved measure to {path}")
    return path


def load_measure(path: str) -> FiniteMeasure:
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Cannot read measure file {path}: {e}") from e
    return measure_from_dict(data)
