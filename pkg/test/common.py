#
# This file is part of LiteLMG.
#
# SPDX-License-Identifier: BSD-2-Clause

import io
import os
import csv
import json
import math
import difflib

import numpy as np


def reference_path(filename):
    script_dir = os.path.dirname(os.path.realpath(__file__))
    return os.path.join(script_dir, "reference", filename)


def compare_with_reference(test_case, content, filename):
    ref_filename = reference_path(filename)
    with open(ref_filename, "r") as f:
        reference = f.read().split("\n")
    content = content.split("\n")
    diff = list(difflib.unified_diff(content, reference, fromfile=filename, tofile=ref_filename))
    msg = "Unified diff:\n" + "\n".join(diff)
    test_case.assertEqual(len(diff), 0, msg=msg)


def compare_csv_with_reference(test_case, content, filename, rtol=1e-9, atol=1e-12):
    """Row by row against a committed CSV holding a subset of the columns.

    Text cells must match exactly, numbers within atol + rtol*|expected| (nan matches nan).
    """
    with open(reference_path(filename), newline="") as f:
        reference = list(csv.DictReader(f))
    rows = list(csv.DictReader(io.StringIO(content)))
    test_case.assertEqual(len(rows), len(reference), msg="{}: row count".format(filename))
    for k, (row, expected) in enumerate(zip(rows, reference)):
        for column, e in expected.items():
            where = "{} row {} column {}".format(filename, k, column)
            test_case.assertIn(column, row, msg=where)
            try:
                e = float(e)
            except ValueError:
                test_case.assertEqual(row[column], e, msg=where)
                continue
            v = float(row[column])
            if math.isnan(e):
                test_case.assertTrue(math.isnan(v), msg="{}: {} is not nan".format(where, v))
            elif v != e:
                test_case.assertLessEqual(abs(v - e), atol + rtol*abs(e),
                    msg="{}: {} != {}".format(where, v, e))


def update_reference(content, filename):
    with open(reference_path(filename), "w") as f:
        f.write(content)


def load_json_reference(filename):
    with open(reference_path(filename)) as f:
        return json.load(f)


def assert_close(test_case, value, expected, rtol=1e-9, atol=0.0, msg=None):
    """assertTrue(|value - expected| <= atol + rtol*|expected|) with a readable message."""
    value    = np.asarray(value)
    expected = np.asarray(expected)
    ok = np.all(np.abs(value - expected) <= atol + rtol*np.abs(expected))
    test_case.assertTrue(ok, msg="{} != {} (rtol={}, atol={}){}".format(
        value, expected, rtol, atol, "" if msg is None else ": " + msg))


def random_density(dimension, rng, rank=None):
    """Random full-rank (or given-rank) density matrix."""
    rank = dimension if rank is None else rank
    a = rng.normal(size=(dimension, rank)) + 1j*rng.normal(size=(dimension, rank))
    rho = a @ a.conj().T
    return rho/np.trace(rho).real
