"""JSON reports shared by the CLI and the selftest."""
from __future__ import annotations

import datetime
import json
import math

import numpy as np

SCHEMA = "gauss-psh-lab/1"


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers for ``json``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": jsonable(float(obj.real)), "im": jsonable(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def make_report(command, config, results, verdicts, started, wall_time):
    """Assemble a report; everything except ``timestamp`` is deterministic."""
    return {
        "schema": SCHEMA,
        "command": command,
        "config": jsonable(config),
        "results": jsonable(results),
        "verdicts": {k: bool(v) for k, v in verdicts.items()},
        "passed": all(verdicts.values()),
        "timestamp": {
            "started": datetime.datetime.fromtimestamp(started, datetime.timezone.utc).isoformat(),
            "wall_time_s": round(wall_time, 3),
        },
    }


def dumps(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
