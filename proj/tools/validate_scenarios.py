"""Validate scenario files against the published schema."""
import json
import sys
from pathlib import Path

import jsonschema


def main(argv):
    schema = json.loads(Path(argv[1]).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failed = 0
    for path in argv[2:]:
        errors = sorted(validator.iter_errors(json.loads(Path(path).read_text())), key=str)
        for e in errors:
            print(f"{path}: /{'/'.join(map(str, e.absolute_path))}: {e.message}")
        failed += bool(errors)
        print(f"{path}: {'ok' if not errors else 'invalid'}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
