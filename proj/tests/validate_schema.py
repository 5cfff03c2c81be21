"""Validates eval and invert JSON output against the schema the binary embeds."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def run(binary, *args):
    out = subprocess.run([binary, *args], check=True, capture_output=True, text=True)
    return out.stdout


def main():
    binary = sys.argv[1]
    schema = json.loads(run(binary, "--print-schema"))
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        tau = tmp / "tau.txt"
        tau.write_text("".join(f"{v}\n" for v in [1, 1, 1, 1, 1, 3, 3, 3, 3, 3]))
        docs = [json.loads(run(binary, "eval", "--tau", str(tau), "--n", "1000"))]
        docs.append(json.loads(run(binary, "eval", "--tau", str(tau), "--n", "4",
                                   "--jacobian", str(tmp / "jac.csv"))))
        lam = tmp / "lambda.txt"
        lam.write_text("".join(f"{v!r}\n" for v in docs[0]["lambda"]))
        docs.append(json.loads(run(binary, "invert", "--lambda", str(lam), "--n", "1000")))

    for doc in docs:
        validator.validate(doc)
    bad = dict(docs[0], schema_version=2)
    if validator.is_valid(bad):
        sys.exit("schema accepted a wrong schema_version")
    print(f"validated {len(docs)} documents")


if __name__ == "__main__":
    main()
