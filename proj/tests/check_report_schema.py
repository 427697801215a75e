"""Validate a report.json against the published schema."""
import json
import sys

import jsonschema

schema_path, *report_paths = sys.argv[1:]
with open(schema_path) as f:
    schema = json.load(f)
for path in report_paths:
    with open(path) as f:
        jsonschema.validate(json.load(f), schema)
    print(f"{path}: valid")
