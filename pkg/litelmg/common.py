#
# This file is part of LiteLMG.
#
# SPDX-License-Identifier: BSD-2-Clause

import os
import csv
import io
import math
import logging
import tempfile
from collections import namedtuple

import numpy as np

logger = logging.getLogger(__name__)

# Units --------------------------------------------------------------------------------------------

# Every frequency/rate is a plain float meaning "value/2pi in MHz"; time is in 1/(2pi x MHz).
# Dimensionless runs scale everything by gamma = 1.

# Exceptions ---------------------------------------------------------------------------------------

class ConfigError(ValueError):
    """Invalid user input: missing/unknown fields, unit suffixes, empty grids, caps exceeded."""


class NumericalError(RuntimeError):
    """Numerical failure during an evolution or a solve.

    Carries the simulation time of the failure and the last state known to be good so callers can
    report where a run went wrong.
    """
    def __init__(self, message, time=None, last_state=None):
        RuntimeError.__init__(self, message)
        self.time       = time
        self.last_state = last_state

# Settings -----------------------------------------------------------------------------------------

class Settings:
    def set_attributes(self, attributes):
        for k, v in attributes.items():
            if k == "self" or k.startswith("_"):
                continue
            setattr(self, k, v)

    def as_dict(self):
        d = dict()
        for attr, value in vars(self).items():
            if attr == "self" or attr.startswith("_"):
                continue
            if isinstance(value, Settings):
                value = value.as_dict()
            d[attr] = value
        return d

    def replace(self, **changes):
        # Shallow copy with some fields changed, the original stays untouched.
        new = self.__class__.__new__(self.__class__)
        new.__dict__.update(self.__dict__)
        for k, v in changes.items():
            if not hasattr(self, k):
                raise AttributeError("{} has no field {}".format(self.__class__.__name__, k))
            setattr(new, k, v)
        return new

    def __eq__(self, other):
        if not isinstance(other, self.__class__):
            return NotImplemented
        return _equal(self.as_dict(), other.as_dict())

    def __repr__(self):
        return "{}({})".format(self.__class__.__name__, self.as_dict())


def _equal(a, b):
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_equal(a[k], b[k]) for k in a)
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.array_equal(np.asarray(a), np.asarray(b))
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(_equal(x, y) for x, y in zip(a, b))
    return a == b

# Records ------------------------------------------------------------------------------------------

def flat_record(items):
    """Flatten (name, value) pairs into a JSON-safe dict, complex values split into _re/_im."""
    record = dict()
    for name, value in items:
        if isinstance(value, (complex, np.complexfloating)):
            record[name + "_re"] = float(value.real)
            record[name + "_im"] = float(value.imag)
        elif isinstance(value, (bool, np.bool_)):
            record[name] = bool(value)
        elif isinstance(value, (int, np.integer)):
            record[name] = int(value)
        elif isinstance(value, (float, np.floating)):
            record[name] = float(value)
        else:
            record[name] = value
    return record

# Integration --------------------------------------------------------------------------------------

def rk4_step(f, t, y, dt):
    """One classic fourth-order Runge-Kutta step of dy/dt = f(t, y)."""
    k1 = f(t,          y)
    k2 = f(t + dt/2,   y + k1*(dt/2))
    k3 = f(t + dt/2,   y + k2*(dt/2))
    k4 = f(t + dt,     y + k3*dt)
    return y + (k1 + 2*(k2 + k3) + k4)*(dt/6)


def step_count(t_end, dt):
    # Number of equal steps covering [0, t_end] with a step no longer than dt.
    if t_end <= 0:
        raise ValueError("t_end must be positive, got {}".format(t_end))
    if dt <= 0:
        raise ValueError("dt must be positive, got {}".format(dt))
    return max(1, int(math.ceil(t_end/dt - 1e-9)))


def is_finite(y):
    return bool(np.all(np.isfinite(y)))

# Output -------------------------------------------------------------------------------------------

def format_float(value):
    return "{:.16e}".format(float(value))


def csv_content(header, rows):
    """Render rows as CSV text: header row, comma separated, LF line endings."""
    f = io.StringIO()
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return f.getvalue()


def atomic_write(path, content):
    """Write content to path through a temporary file in the same directory and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp_", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.debug("Wrote %s (%d bytes)", path, len(content))

# Parallel runs ------------------------------------------------------------------------------------

InQueueItem  = namedtuple("InQueueItem",  ["index", "item"])
OutQueueItem = namedtuple("OutQueueItem", ["index", "result", "error"])


def _worker(func, in_queue, out_queue):
    while True:
        in_item = in_queue.get()
        if in_item is None:
            return
        try:
            out_queue.put(OutQueueItem(in_item.index, func(in_item.item), None))
        except Exception as e:
            out_queue.put(OutQueueItem(in_item.index, None, e))


def run_parallel(func, items, threads=1):
    """Map func over items, optionally on worker processes; results keep the order of items.

    func must be a module-level function and items picklable when threads != 1.
    """
    items = list(items)
    if threads == 0:
        threads = os.cpu_count() or 1
    threads = min(threads, len(items))
    if threads <= 1:
        return [func(item) for item in items]

    from multiprocessing import Process, Queue

    logger.info("Using %d parallel jobs for %d items", threads, len(items))
    in_queue, out_queue = Queue(), Queue()
    workers = [Process(target=_worker, args=(func, in_queue, out_queue)) for _ in range(threads)]
    for w in workers:
        w.start()

    # Put all items with index to retrieve them in order
    for i, item in enumerate(items):
        in_queue.put(InQueueItem(i, item))

    # Send "finish signal" for each worker
    for _ in workers:
        in_queue.put(None)

    # Retrieve results in proper order
    out_items = sorted([out_queue.get() for _ in items], key=lambda o: o.index)

    for p in workers:
        p.join()

    for out in out_items:
        if out.error is not None:
            raise out.error
    return [out.result for out in out_items]
