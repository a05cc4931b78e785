#!/usr/bin/env python3
"""Regenerate the JSON Schema fixtures the web console validates
against, straight from the service's wire models. Run after any wire
schema change:

    python scripts/export_wire_schema.py
"""

import json
from pathlib import Path

from inferplan.wire import WireRequest, WireResponse

OUT_DIR = Path(__file__).resolve().parent.parent / "frontend" / "schema"


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, model in (("wire_request", WireRequest), ("wire_response", WireResponse)):
        path = OUT_DIR / f"{name}.schema.json"
        path.write_text(json.dumps(model.model_json_schema(), indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
