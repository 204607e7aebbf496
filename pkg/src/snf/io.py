"""File formats: family JSON, reports and CSV tables.

Family files use one-based indices throughout. Three shapes are accepted::

    {"n": 4, "explicit": [[1, 2, 3, 4], [2, 1, 3, 4]]}
    {"n": 6, "row": 1, "columns": [1, 2, 3], "added": [...], "removed": [...]}
    {"n": 6, "column": 2, "rows": [1, 4]}

``added``/``removed`` are optional lists of permutations (image lists).
"""
import csv
import hashlib
import io as _io
import json
import math

import numpy as np

from snf import __version__
from snf import family as fs
from snf import perm as P
from snf.errors import ValidationError


def _perm_list(obj, n, field):
    if not isinstance(obj, list):
        raise ValidationError(f"field '{field}' must be a list of permutations")
    out = []
    for k, item in enumerate(obj):
        if not isinstance(item, list) or not all(isinstance(x, int) and not isinstance(x, bool)
                                                 for x in item):
            raise ValidationError(f"field '{field}[{k}]' must be a list of integers")
        if len(item) != n:
            raise ValidationError(f"field '{field}[{k}]' has length {len(item)}, expected n={n}")
        try:
            out.append(P.Permutation.from_one_based(item))
        except ValidationError as exc:
            raise ValidationError(f"field '{field}[{k}]': {exc}") from None
    return out


def _index_list(obj, n, field):
    if not isinstance(obj, list) or not all(isinstance(x, int) and not isinstance(x, bool)
                                            for x in obj):
        raise ValidationError(f"field '{field}' must be a list of integers")
    if any(not 1 <= x <= n for x in obj):
        raise ValidationError(f"field '{field}' has an entry outside 1..{n}")
    if len(set(obj)) != len(obj):
        raise ValidationError(f"field '{field}' has repeated entries")
    return [x - 1 for x in obj]


def family_from_dict(d):
    if not isinstance(d, dict):
        raise ValidationError("family file must hold a JSON object")
    n = d.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError("field 'n' must be a positive integer")
    if "explicit" in d:
        perms = _perm_list(d["explicit"], n, "explicit")
        ranks = [p.rank() for p in perms]
        if len(set(ranks)) != len(ranks):
            raise ValidationError("field 'explicit' lists a permutation twice")
        return fs.BooleanFamily.from_ranks(n, ranks)
    if "row" in d:
        line, key, members = fs.ROW, "row", "columns"
    elif "column" in d:
        line, key, members = fs.COLUMN, "column", "rows"
    else:
        raise ValidationError("family needs one of the fields 'explicit', 'row', 'column'")
    idx = d[key]
    if not isinstance(idx, int) or isinstance(idx, bool) or not 1 <= idx <= n:
        raise ValidationError(f"field '{key}' must be an integer in 1..{n}")
    if members not in d:
        raise ValidationError(f"field '{members}' is required with '{key}'")
    cosets = _index_list(d[members], n, members)
    added = [p.rank() for p in _perm_list(d.get("added", []), n, "added")]
    removed = [p.rank() for p in _perm_list(d.get("removed", []), n, "removed")]
    return fs.BooleanFamily.symbolic(n, line, idx - 1, cosets, added, removed)


def family_to_dict(F):
    if F.is_explicit:
        perms = P.all_perms(F.n)[F.member] + 1
        return {"n": F.n, "explicit": perms.tolist()}
    key, members = ("row", "columns") if F.line == fs.ROW else ("column", "rows")
    d = {"n": F.n, key: F.index + 1, members: sorted(j + 1 for j in F.cosets)}
    if F.added:
        d["added"] = [list(P.unrank(r, F.n).to_one_based()) for r in sorted(F.added)]
    if F.removed:
        d["removed"] = [list(P.unrank(r, F.n).to_one_based()) for r in sorted(F.removed)]
    return d


def read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from None


def read_family(path):
    return family_from_dict(read_json(path))


def file_digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _clean(obj):
    """Make ``obj`` JSON-serialisable: numpy scalars and arrays become Python
    values and non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj):
    """Canonical JSON: sorted keys, floats as their shortest round-trip repr."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(config):
    canon = json.dumps(_clean(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def meta(seed, config):
    return {"version": __version__, "seed": seed, "config_hash": config_hash(config)}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(columns, rows, header_meta):
    """CSV with a leading ``# snf <version> seed=... config=...`` comment line."""
    buf = _io.StringIO()
    buf.write(f"# snf {header_meta['version']} seed={header_meta['seed']} "
              f"config={header_meta['config_hash']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def matrix_rows(a):
    a = np.asarray(a, dtype=np.float64)
    return [{"row": i + 1, **{f"c{j + 1}": a[i, j] for j in range(a.shape[1])}}
            for i in range(a.shape[0])]
