"""Runs the CLI end to end and validates every JSON it writes against schemas/."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def run(cli, *args):
    result = subprocess.run([cli, *args], capture_output=True, text=True)
    if result.returncode != 0:
        sys.exit(f"{' '.join(args)} failed ({result.returncode}): {result.stderr}")


def validate(schema_dir, name, path):
    schema = json.loads((schema_dir / f"{name}.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    doc = json.loads(pathlib.Path(path).read_text())
    jsonschema.validate(doc, schema, cls=jsonschema.Draft202012Validator)
    print(f"{name}: {path} ok")


def main():
    cli, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        run(cli, "simulate", "--n", "300", "--seed", "5", "--out", str(tmp / "d.csv"),
            "--truth", str(tmp / "truth.json"))
        validate(schema_dir, "truth", tmp / "truth.json")
        run(cli, "fit", "--data", str(tmp / "d.csv"), "--max-evals", "100", "--out",
            str(tmp / "model.json"))
        validate(schema_dir, "model", tmp / "model.json")
        run(cli, "benchmark", "--n", "200", "--replicates", "2", "--max-evals", "60",
            "--json", str(tmp / "bench.json"))
        validate(schema_dir, "benchmark", tmp / "bench.json")

        # A broken document must be rejected.
        doc = json.loads((tmp / "model.json").read_text())
        doc["bandwidth"] = [-1.0]
        schema = json.loads((schema_dir / "model.schema.json").read_text())
        try:
            jsonschema.validate(doc, schema, cls=jsonschema.Draft202012Validator)
        except jsonschema.ValidationError:
            print("negative bandwidth rejected")
        else:
            sys.exit("schema accepted a negative bandwidth")


if __name__ == "__main__":
    main()
