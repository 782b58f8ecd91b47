"""File formats: JSON system descriptions, witnesses and certificates, a binary
matrix sidecar, and run manifests.

Every file carries ``"version": 1``.  Rationals are strings ``"p/q"`` (or
integers).  Output JSON is written with sorted keys and no timestamps, so
equal inputs give byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import FiniteAction, check_witness
from .errors import MetricError, NonBijective, ParseError, ResfinError, UnsupportedVersion
from .matrix import MatrixTuple
from .paradox import (ParadoxCertificate, boundary_context, compactified_context,
                      finite_action_context, shift_context)
from .systems import (AlgebraicSystem, BoundaryPoint, BoundarySystem, CompactifiedZ,
                      FiniteSample, PeriodicPoint, PolytopeSystem, QuotientConfig, ShiftSystem)
from .words import FiniteQuotient, parse_word, word_str

__all__ = [
    "FORMAT_VERSION",
    "SystemDescriptor",
    "RunManifest",
    "parse_fraction",
    "format_value",
    "parse_system",
    "parse_system_file",
    "system_to_dict",
    "point_to_json",
    "point_from_json",
    "witness_to_dict",
    "witness_from_dict",
    "build_context",
    "certificate_to_dict",
    "certificate_from_dict",
    "write_json",
    "read_json",
    "write_matrices",
    "read_matrices",
    "file_digest",
]

FORMAT_VERSION = 1
MAGIC = b"RESFINMX"
PACKAGE_VERSION = "0.1.0"


def parse_fraction(value, where="value") -> Fraction:
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise ParseError(f"{where}: {value!r} is not a rational 'p/q' string")


def format_value(v) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _need(data, key, where):
    if not isinstance(data, dict) or key not in data:
        raise ParseError(f"{where}: missing field '{key}'")
    return data[key]


def _int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    return value


def _words(value, where):
    try:
        return parse_word(value)
    except (ValueError, AttributeError) as exc:
        raise ParseError(f"{where}: bad word {value!r}") from exc


@dataclass
class SystemDescriptor:
    """A parsed description: ``system`` is a System or a FiniteAction."""

    kind: str
    system: object
    raw: dict
    source: str = "<data>"


def _check_version(data, where):
    if not isinstance(data, dict):
        raise ParseError(f"{where}: top level must be an object")
    version = _need(data, "version", where)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"{where}: version {version!r} is not supported (expected {FORMAT_VERSION})")


def _forbidden(data, rank, where):
    pats = []
    for i, pat in enumerate(data.get("forbidden", [])):
        w = f"{where}.forbidden[{i}]"
        entries = []
        if isinstance(pat, dict):
            pat = list(pat.items())
        for j, entry in enumerate(pat):
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise ParseError(f"{w}[{j}]: expected [position, letter]")
            pos, letter = entry
            if rank == 1 and isinstance(pos, int) and not isinstance(pos, bool):
                word = (1,) * pos if pos >= 0 else (-1,) * (-pos)
            else:
                word = _words(str(pos), f"{w}[{j}]")
            entries.append((word, _int(letter, f"{w}[{j}]")))
        if not entries:
            raise ParseError(f"{w}: empty pattern")
        pats.append(tuple(entries))
    return tuple(pats)


def parse_system(data, source="<data>") -> SystemDescriptor:
    """Validate a system description (already decoded from JSON)."""
    _check_version(data, source)
    kind = _need(data, "kind", source)
    where = f"{source}: {kind}"
    try:
        if kind in ("z-shift", "shift"):
            rank = 1 if kind == "z-shift" else _int(_need(data, "rank", where), f"{where}.rank")
            alphabet = _int(_need(data, "alphabet", where), f"{where}.alphabet")
            system = ShiftSystem(rank, alphabet, _forbidden(data, rank, where))
        elif kind == "fr-boundary":
            system = BoundarySystem(_int(_need(data, "rank", where), f"{where}.rank"))
        elif kind == "compactified-z":
            copies = _need(data, "copies", where)
            if not isinstance(copies, list) or not all(isinstance(c, list) and len(c) == 2 for c in copies):
                raise ParseError(f"{where}.copies: expected a list of [minus_label, plus_label]")
            system = CompactifiedZ(copies)
        elif kind == "finite-sample":
            dist = _need(data, "distances", where)
            rows = [[parse_fraction(v, f"{where}.distances[{i}][{j}]") for j, v in enumerate(r)]
                    for i, r in enumerate(dist)]
            images = data.get("images")
            idist = data.get("image_distances")
            if idist is not None:
                idist = [None if t is None else
                         [[parse_fraction(v, f"{where}.image_distances[{k}][{i}][{j}]")
                           for j, v in enumerate(r)] for i, r in enumerate(t)]
                         for k, t in enumerate(idist)]
            labels = data.get("labels")
            try:
                system = FiniteSample.from_tables(rows, images, idist,
                                                  tuple(labels) if labels else None)
            except MetricError as exc:
                raise ParseError(f"{where}.distances: {exc}") from exc
        elif kind == "circle":
            q = _int(_need(data, "points", where), f"{where}.points")
            step = data.get("rotation")
            if step is not None:
                system = FiniteSample.circle(q, _int(step, f"{where}.rotation"))
            elif data.get("map") == "north-south":
                system = FiniteSample.circle(q, map_fn=lambda a: a - 0.5 * math.sin(a))
            else:
                raise ParseError(f"{where}: give 'rotation' or map 'north-south'")
        elif kind == "finite-action":
            size = _int(_need(data, "size", where), f"{where}.size")
            gens = _need(data, "generators", where)
            try:
                system = FiniteAction(size, tuple(tuple(_int(v, f"{where}.generators") for v in g)
                                                  for g in gens))
            except NonBijective as exc:
                raise ParseError(f"{where}.generators[{exc.index}]: not a permutation") from exc
        elif kind == "polytope":
            verts = [[parse_fraction(v, f"{where}.vertices") for v in p] for p in _need(data, "vertices", where)]
            a = [[parse_fraction(v, f"{where}.matrix") for v in r] for r in _need(data, "matrix", where)]
            b = [parse_fraction(v, f"{where}.offset") for v in _need(data, "offset", where)]
            system = PolytopeSystem(verts, a, b, int(data.get("grid_den", 4)))
        elif kind == "algebraic-z":
            f = _need(data, "f", where)
            system = AlgebraicSystem({int(k): _int(v, f"{where}.f[{k}]") for k, v in f.items()},
                                     int(data.get("grid_period", 6)))
        else:
            raise ParseError(f"{source}.kind: unknown system kind {kind!r}")
    except ParseError:
        raise
    except (ResfinError, ValueError, TypeError) as exc:
        raise ParseError(f"{where}: {exc}") from exc
    return SystemDescriptor(kind, system, data, source)


def _json_error(exc, source):
    return ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}")


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _json_error(exc, path) from exc


def parse_system_file(path) -> SystemDescriptor:
    return parse_system(read_json(path), str(path))


def system_to_dict(system) -> dict:
    out = {"version": FORMAT_VERSION}
    if isinstance(system, FiniteAction):
        out.update(kind="finite-action", size=system.size, generators=[list(g) for g in system.generators])
    elif isinstance(system, ShiftSystem):
        pats = [[[word_str(w), c] for w, c in pat] for pat in system.forbidden]
        if system.rank == 1:
            out.update(kind="z-shift", alphabet=system.alphabet, forbidden=pats)
        else:
            out.update(kind="shift", rank=system.rank, alphabet=system.alphabet, forbidden=pats)
    elif isinstance(system, BoundarySystem):
        out.update(kind="fr-boundary", rank=system.rank)
    elif isinstance(system, CompactifiedZ):
        out.update(kind="compactified-z", copies=[list(c) for c in system.copies])
    elif isinstance(system, FiniteSample):
        den = system.den
        out.update(kind="finite-sample",
                   distances=[[format_value(Fraction(int(v), den)) for v in row] for row in system.num],
                   images=[None if t is None else list(t) for t in system.images])
        if any(t is not None for t in system.image_num):
            out["image_distances"] = [None if t is None else
                                      [[format_value(Fraction(int(v), den)) for v in row] for row in t]
                                      for t in system.image_num]
        if system.labels is not None:
            out["labels"] = [str(v) for v in system.labels]
    elif isinstance(system, PolytopeSystem):
        out.update(kind="polytope", vertices=[[format_value(v) for v in p] for p in system.vertices],
                   matrix=[[format_value(v) for v in r] for r in system.a],
                   offset=[format_value(v) for v in system.b], grid_den=system.grid_den)
    elif isinstance(system, AlgebraicSystem):
        out.update(kind="algebraic-z", f={str(k): v for k, v in sorted(system.f.items())},
                   grid_period=system.grid_period)
    else:
        raise TypeError(f"cannot serialize {type(system).__name__}")
    return out


# -- points ------------------------------------------------------------------------------

def point_to_json(system, x):
    if isinstance(system, FiniteSample):
        return int(x)
    if isinstance(system, ShiftSystem):
        return {"quotient": [list(p) for p in x.quotient.perms], "coloring": list(x.coloring)}
    if isinstance(system, BoundarySystem):
        return {"prefix": word_str(x.prefix), "cycle": word_str(x.cycle)}
    if isinstance(system, CompactifiedZ):
        return x if isinstance(x, str) else [x[0], x[1]]
    if isinstance(system, PolytopeSystem):
        return [format_value(v) for v in x]
    if isinstance(system, AlgebraicSystem):
        return [format_value(v) for v in x.values]
    raise TypeError(f"no point format for {type(system).__name__}")


def point_from_json(system, v, where="point"):
    try:
        if isinstance(system, FiniteSample):
            x = _int(v, where)
        elif isinstance(system, ShiftSystem):
            x = QuotientConfig(FiniteQuotient(tuple(tuple(p) for p in _need(v, "quotient", where))),
                               tuple(_need(v, "coloring", where)))
        elif isinstance(system, BoundarySystem):
            x = BoundaryPoint(_words(_need(v, "prefix", where), where), _words(_need(v, "cycle", where), where))
        elif isinstance(system, CompactifiedZ):
            x = v if isinstance(v, str) else (_int(v[0], where), _int(v[1], where))
        elif isinstance(system, PolytopeSystem):
            x = tuple(parse_fraction(c, where) for c in v)
        elif isinstance(system, AlgebraicSystem):
            x = PeriodicPoint(tuple(parse_fraction(c, where) for c in v))
        else:
            raise ParseError(f"{where}: no point format for {type(system).__name__}")
    except ParseError:
        raise
    except (ResfinError, ValueError, TypeError, IndexError) as exc:
        raise ParseError(f"{where}: {exc}") from exc
    return system.check_point(x)


# -- witnesses ---------------------------------------------------------------------------

def witness_to_dict(w) -> dict:
    return {
        "version": FORMAT_VERSION,
        "kind": "witness",
        "system": system_to_dict(w.system),
        "action": {"size": w.action.size, "generators": [list(g) for g in w.action.generators]},
        "zeta": [point_to_json(w.system, z) for z in w.zeta],
        "scope": list(w.scope),
        "epsilon": format_value(w.epsilon),
        "density_defect": _number(w.density_defect),
        "equivariance_defect": _number(w.equivariance_defect),
        "passed": bool(w.passed),
    }


def _number(v):
    if isinstance(v, (Fraction, int)):
        return format_value(v)
    return float(v)


def witness_from_dict(data, source="<witness>", epsilon=None):
    """Re-run :func:`check_witness` on a stored witness."""
    _check_version(data, source)
    system = parse_system(_need(data, "system", source), f"{source}.system").system
    act = _need(data, "action", source)
    try:
        action = FiniteAction(_int(_need(act, "size", source), f"{source}.action.size"),
                              tuple(tuple(g) for g in _need(act, "generators", source)))
    except NonBijective as exc:
        raise ParseError(f"{source}.action.generators[{exc.index}]: not a permutation") from exc
    zeta = [point_from_json(system, v, f"{source}.zeta[{i}]") for i, v in enumerate(_need(data, "zeta", source))]
    eps = epsilon if epsilon is not None else parse_fraction(_need(data, "epsilon", source), f"{source}.epsilon")
    return check_witness(system, action, zeta, scope=data.get("scope"), epsilon=eps)


# -- contexts and certificates ---------------------------------------------------------------

def build_context(system, window: int, radius: int):
    if isinstance(system, BoundarySystem):
        return boundary_context(system.rank, window, radius)
    if isinstance(system, FiniteAction):
        return finite_action_context(system, radius)
    if isinstance(system, CompactifiedZ):
        return compactified_context(system, window, radius)
    if isinstance(system, ShiftSystem):
        return shift_context(system, window, radius)
    raise ParseError(f"no action context for {type(system).__name__}")


def _atom_json(a):
    return json.loads(json.dumps(a, default=str))


def _atom_lookup(ctx):
    return {json.dumps(_atom_json(t), sort_keys=True): t for t in ctx.target}


def certificate_to_dict(cert: ParadoxCertificate, system, window, radius) -> dict:
    return {
        "version": FORMAT_VERSION,
        "kind": "paradox-certificate",
        "system": system_to_dict(system),
        "context": {"window": window, "radius": radius, "digest": cert.digest},
        "k": cert.k,
        "l": cert.l,
        "target_set": sorted((_atom_json(a) for a in cert.target_set), key=json.dumps),
        "pieces": [{"translator": word_str(s),
                    "atoms": sorted((_atom_json(a) for a in piece), key=json.dumps)}
                   for s, piece in cert.pieces],
    }


def certificate_from_dict(data, source="<certificate>"):
    """Rebuild the context from the embedded system and return ``(cert, ctx)``."""
    _check_version(data, source)
    system = parse_system(_need(data, "system", source), f"{source}.system").system
    c = _need(data, "context", source)
    ctx = build_context(system, _int(c.get("window", 1), f"{source}.context.window"),
                        _int(_need(c, "radius", source), f"{source}.context.radius"))
    lookup = _atom_lookup(ctx)

    def atoms(items, where):
        out = set()
        for a in items:
            key = json.dumps(a, sort_keys=True)
            if key not in lookup:
                raise ParseError(f"{where}: {a!r} is not an atom of the context")
            out.add(lookup[key])
        return frozenset(out)

    pieces = tuple((_words(p["translator"], f"{source}.pieces[{i}]"), atoms(p["atoms"], f"{source}.pieces[{i}]"))
                   for i, p in enumerate(_need(data, "pieces", source)))
    cert = ParadoxCertificate(c.get("digest", ""), atoms(_need(data, "target_set", source), f"{source}.target_set"),
                              pieces, _int(_need(data, "k", source), f"{source}.k"),
                              _int(_need(data, "l", source), f"{source}.l"))
    return cert, ctx


# -- manifests and output -------------------------------------------------------------------

def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    inputs: dict = field(default_factory=dict)  # file name -> sha256
    seed: int | None = None
    tolerances: dict = field(default_factory=dict)
    version: str = PACKAGE_VERSION

    @classmethod
    def for_files(cls, command, paths, seed=None, tolerances=None):
        return cls(command, {Path(p).name: file_digest(p) for p in paths}, seed, dict(tolerances or {}))

    def to_dict(self):
        return {"command": self.command, "inputs": dict(sorted(self.inputs.items())), "seed": self.seed,
                "tolerances": {k: str(v) for k, v in sorted(self.tolerances.items())},
                "version": self.version}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(path, obj, manifest: RunManifest | None = None):
    if manifest is not None:
        obj = dict(obj, manifest=manifest.to_dict())
    Path(path).write_text(dumps(obj))


# -- matrix sidecar ---------------------------------------------------------------------------

def write_matrices(path, t: MatrixTuple, manifest: RunManifest | None = None):
    """``RESFINMX``, a little-endian u32 header length, a JSON header, then
    complex128 row-major members: projections, unitaries, conjugated families."""
    members = list(t.projections) + list(t.unitaries) + [c for fam in t.conjugated for c in fam]
    header = {"version": FORMAT_VERSION, "dimension": t.dimension, "projections": len(t.projections),
              "unitaries": len(t.unitaries), "dtype": "complex128", "order": "row-major",
              "tolerances": {k: float(v) for k, v in sorted(t.tolerances.items())}}
    if manifest is not None:
        header["manifest"] = manifest.to_dict()
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for m in members:
            fh.write(np.ascontiguousarray(m, dtype="<c16").tobytes())


def read_matrices(path) -> MatrixTuple:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ParseError(f"{path}: bad magic header")
    if len(data) < 12:
        raise ParseError(f"{path}: truncated header")
    (size,) = struct.unpack("<I", data[8:12])
    try:
        header = json.loads(data[12:12 + size])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: header is not JSON ({exc.msg})") from exc
    _check_version(header, str(path))
    d = _int(_need(header, "dimension", path), f"{path}.dimension")
    n = _int(_need(header, "projections", path), f"{path}.projections")
    r = _int(_need(header, "unitaries", path), f"{path}.unitaries")
    count = n + r + r * n
    body = data[12 + size:]
    if len(body) != count * d * d * 16:
        raise ParseError(f"{path}: expected {count} matrices of dimension {d}")
    arr = np.frombuffer(body, dtype="<c16").reshape(count, d, d).astype(complex)
    ps = list(arr[:n])
    vs = list(arr[n:n + r])
    conj = [list(arr[n + r + k * n:n + r + (k + 1) * n]) for k in range(r)]
    return MatrixTuple(d, ps, vs, conj, dict(header.get("tolerances", {})))
