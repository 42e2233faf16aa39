"""Runs original and rewritten sources eagerly and compares what they do.

Reads a JSON list of cases on stdin. Each case has `name`, `original`,
`transformed`, `entry` (a callable name in the module namespace) and `runs`,
a list of runs with `args` (Python expressions) and optional `attrs` /
`params` overrides applied to the entry object. Prints one JSON object per
case with the largest difference seen and whether the captured output
matched, both in order and as a multiset of lines, plus the original's
executed line numbers per run.
"""

import contextlib
import io
import json
import logging
import sys

import torch

torch.compile = lambda fn=None, *args, **kwargs: fn if fn is not None else (lambda f: f)


def load(src, seed):
    torch.manual_seed(seed)
    ns = {"__name__": "case"}
    exec(compile(src, "<case>", "exec"), ns)
    return ns


def override(obj, run):
    for name, value in run.get("attrs", {}).items():
        setattr(obj, name, value)
    params = dict(obj.named_parameters()) if hasattr(obj, "named_parameters") else {}
    with torch.no_grad():
        for name, spec in run.get("params", {}).items():
            params[name].fill_(spec["fill"])


def flatten(value):
    if isinstance(value, torch.Tensor):
        return [value]
    if isinstance(value, (tuple, list)):
        return [t for v in value for t in flatten(v)]
    return [torch.tensor(float(value))]


def tracer(lines):
    def trace(frame, event, arg):
        if frame.f_code.co_filename != "<case>":
            return None
        if event == "line":
            lines.add(frame.f_lineno)
        return trace
    return trace


def execute(src, case, run, lines=None):
    ns = load(src, case.get("seed", 0))
    fn = ns[case["entry"]]
    override(fn, run)
    torch.manual_seed(1)
    args = [eval(a, {"torch": torch}) for a in run.get("args", [])]
    kwargs = {k: eval(a, {"torch": torch}) for k, a in run.get("kwargs", {}).items()}
    out, err = io.StringIO(), io.StringIO()
    handler = logging.StreamHandler(err)
    root = logging.getLogger()
    root.addHandler(handler)
    root.setLevel(logging.DEBUG)
    if lines is not None:
        sys.settrace(tracer(lines))
    try:
        with torch.no_grad(), contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            result = fn(*args, **kwargs)
    finally:
        sys.settrace(None)
        root.removeHandler(handler)
    return flatten(result), out.getvalue() + err.getvalue()


def main():
    results = []
    for case in json.load(sys.stdin):
        max_abs, max_rel, text_match, lines_match = 0.0, 0.0, True, True
        covered = []
        for run in case["runs"]:
            lines = set()
            a, text_a = execute(case["original"], case, run, lines)
            covered.append(sorted(lines))
            b, text_b = execute(case["transformed"], case, run)
            if len(a) != len(b) or any(x.shape != y.shape for x, y in zip(a, b)):
                max_abs = max_rel = float("inf")
                continue
            for x, y in zip(a, b):
                diff = (x.double() - y.double()).abs()
                if diff.numel():
                    max_abs = max(max_abs, diff.max().item())
                    scale = y.double().abs().clamp_min(1e-30)
                    max_rel = max(max_rel, (diff / scale).max().item())
            text_match &= text_a == text_b
            lines_match &= sorted(text_a.splitlines()) == sorted(text_b.splitlines())
        results.append({"name": case["name"], "max_abs": max_abs, "max_rel": max_rel, "text_match": text_match, "lines_match": lines_match, "covered": covered})
    json.dump(results, sys.stdout)


main()
