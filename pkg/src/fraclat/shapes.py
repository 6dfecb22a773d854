"""Built-in geometric shapes, the CLI shape mini-language and mask files.

Shapes are exact geometric predicates: a lattice domain is produced by
testing cell centers against ``contains``.  The mini-language understood by
:func:`parse_shape` is::

    interval:a,b
    ball:cx,r            (1D)  |  ball:cx,cy,r      (2D)
    rect:x0,y0,x1,y1
    annulus:cx,rin,rout  (1D)  |  annulus:cx,cy,rin,rout (2D)
    slab:L,w             truncated slab (-L,L)^(N-1) x (-w,w); interval (-w,w) in 1D
    mask:<path>          FRACMASK v1 file
    punctured:<spec>;i[,j][;i2[,j2]...]   cells removed from an inner shape
"""

import os

import numpy as np


class ShapeError(ValueError):
    pass


class MaskFormatError(ValueError):
    """Raised on any deviation from the strict FRACMASK v1 format."""


class Shape:
    """Base: a dim-dimensional region with a predicate and a bounding box."""

    dim = None

    def contains(self, pts):
        """Boolean array: which points (shape ``(m, dim)``) lie inside."""
        raise NotImplementedError

    def bbox(self):
        """(lo, hi) arrays of the tight axis-aligned bounding box."""
        raise NotImplementedError

    def spec(self):
        """Round-trippable mini-language string."""
        raise NotImplementedError


class Interval(Shape):
    dim = 1

    def __init__(self, a, b):
        if not b > a:
            raise ShapeError(f"empty interval ({a}, {b})")
        self.a, self.b = float(a), float(b)

    def contains(self, pts):
        x = np.asarray(pts).reshape(-1, 1)[:, 0]
        return (x > self.a) & (x < self.b)

    def bbox(self):
        return np.array([self.a]), np.array([self.b])

    def spec(self):
        return f"interval:{self.a:g},{self.b:g}"


class Ball(Shape):
    def __init__(self, center, r):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.r = float(r)
        if self.r <= 0:
            raise ShapeError(f"ball radius must be positive, got {r}")
        self.dim = self.center.size
        self.closed = False

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        d = np.linalg.norm(pts - self.center, axis=1)
        return d <= self.r if self.closed else d < self.r

    def bbox(self):
        return self.center - self.r, self.center + self.r

    def spec(self):
        c = ",".join(f"{v:g}" for v in self.center)
        return f"ball:{c},{self.r:g}"


class Annulus(Shape):
    def __init__(self, center, r_in, r_out):
        if not 0 < r_in < r_out:
            raise ShapeError(f"need 0 < r_in < r_out, got {r_in}, {r_out}")
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.r_in, self.r_out = float(r_in), float(r_out)
        self.dim = self.center.size

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        d = np.linalg.norm(pts - self.center, axis=1)
        return (d > self.r_in) & (d < self.r_out)

    def bbox(self):
        return self.center - self.r_out, self.center + self.r_out

    def spec(self):
        c = ",".join(f"{v:g}" for v in self.center)
        return f"annulus:{c},{self.r_in:g},{self.r_out:g}"


class Rectangle(Shape):
    dim = 2

    def __init__(self, x0, y0, x1, y1):
        if not (x1 > x0 and y1 > y0):
            raise ShapeError("rectangle corners must satisfy x1 > x0, y1 > y0")
        self.lo = np.array([float(x0), float(y0)])
        self.hi = np.array([float(x1), float(y1)])

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return np.all((pts > self.lo) & (pts < self.hi), axis=1)

    def bbox(self):
        return self.lo.copy(), self.hi.copy()

    def spec(self):
        return "rect:" + ",".join(f"{v:g}" for v in (*self.lo, *self.hi))


class Slab(Shape):
    """Truncated slab (-L, L)^(N-1) x (-w, w); in 1D just (-w, w)."""

    def __init__(self, length, half_width, dim=2):
        if length <= 0 or half_width <= 0:
            raise ShapeError("slab length and half-width must be positive")
        self.length, self.half_width, self.dim = float(length), float(half_width), dim

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        inside = np.abs(pts[:, -1]) < self.half_width
        for k in range(self.dim - 1):
            inside &= np.abs(pts[:, k]) < self.length
        return inside

    def bbox(self):
        if self.dim == 1:
            return np.array([-self.half_width]), np.array([self.half_width])
        lo = np.array([-self.length] * (self.dim - 1) + [-self.half_width])
        return lo, -lo

    def spec(self):
        return f"slab:{self.length:g},{self.half_width:g}"


class Punctured(Shape):
    """An inner shape with whole lattice cells removed.

    The removed cells are identified by their future grid index; they are
    resolved to exact axis-aligned boxes once the grid geometry is known,
    so the predicate stays purely geometric.
    """

    def __init__(self, inner, removed_cells):
        self.inner = inner
        self.dim = inner.dim
        self.removed_cells = [tuple(int(v) for v in c) for c in removed_cells]
        self._boxes = []

    def bind_grid(self, origin, h):
        """Resolve removed cell indices to geometric boxes on a given grid."""
        self._boxes = []
        origin = np.asarray(origin, dtype=float)
        for idx in self.removed_cells:
            lo = origin + np.asarray(idx, dtype=float) * h
            self._boxes.append((lo, lo + h))

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        inside = self.inner.contains(pts)
        for lo, hi in self._boxes:
            inside &= ~np.all((pts >= lo) & (pts <= hi), axis=1)
        return inside

    def bbox(self):
        return self.inner.bbox()

    def spec(self):
        cells = ";".join(",".join(str(v) for v in c) for c in self.removed_cells)
        return f"punctured:{self.inner.spec()};{cells}"


class MaskShape(Shape):
    """Shape backed by an explicit FRACMASK v1 active mask."""

    def __init__(self, h, active, path=None):
        self.h = float(h)
        self.active = np.asarray(active, dtype=bool)
        self.dim = self.active.ndim
        self.path = path

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, self.dim)
        idx = np.floor(pts / self.h).astype(int)
        ok = np.ones(len(pts), dtype=bool)
        for k in range(self.dim):
            ok &= (idx[:, k] >= 0) & (idx[:, k] < self.active.shape[k])
        out = np.zeros(len(pts), dtype=bool)
        if ok.any():
            sel = tuple(idx[ok, k] for k in range(self.dim))
            out[ok] = self.active[sel]
        return out

    def bbox(self):
        lo = np.zeros(self.dim)
        return lo, np.asarray(self.active.shape, dtype=float) * self.h

    def spec(self):
        return f"mask:{self.path or '<memory>'}"


def read_mask(path):
    """Parse a FRACMASK v1 file; any format deviation raises MaskFormatError."""
    with open(path, "r") as f:
        lines = [ln.rstrip("\n") for ln in f]
    if not lines or lines[0] != "FRACMASK v1":
        raise MaskFormatError("first line must be exactly 'FRACMASK v1'")
    if len(lines) < 2:
        raise MaskFormatError("missing header line 'N h nx [ny]'")
    head = lines[1].split(" ")
    if len(head) not in (3, 4) or "" in head:
        raise MaskFormatError("header must be 'N h nx' or 'N h nx ny'")
    try:
        dim = int(head[0])
        h = float(head[1])
        nx = int(head[2])
        ny = int(head[3]) if len(head) == 4 else None
    except ValueError as exc:
        raise MaskFormatError(f"malformed header: {exc}") from exc
    if dim not in (1, 2):
        raise MaskFormatError(f"N must be 1 or 2, got {dim}")
    if h <= 0:
        raise MaskFormatError("h must be positive")
    if dim == 1 and ny is not None:
        raise MaskFormatError("1D header must not carry ny")
    if dim == 2 and ny is None:
        raise MaskFormatError("2D header requires ny")
    rows = lines[2:]
    while rows and rows[-1] == "":
        rows.pop()
    nrows = 1 if dim == 1 else ny
    if len(rows) != nrows:
        raise MaskFormatError(f"expected {nrows} mask row(s), found {len(rows)}")
    grid = np.zeros((nx,) if dim == 1 else (nx, ny), dtype=bool)
    for j, row in enumerate(rows):
        if len(row) != nx:
            raise MaskFormatError(f"row {j} has {len(row)} columns, expected {nx}")
        if set(row) - {"0", "1"}:
            raise MaskFormatError(f"row {j} contains characters other than 0/1")
        bits = np.frombuffer(row.encode(), dtype=np.uint8) == ord("1")
        if dim == 1:
            grid[:] = bits
        else:
            grid[:, j] = bits
    return MaskShape(h, grid, path=path)


def write_mask(path, h, active):
    """Write an active mask in FRACMASK v1 format."""
    active = np.asarray(active, dtype=bool)
    with open(path, "w") as f:
        f.write("FRACMASK v1\n")
        if active.ndim == 1:
            f.write(f"1 {h:.17g} {active.shape[0]}\n")
            f.write("".join("1" if v else "0" for v in active) + "\n")
        else:
            nx, ny = active.shape
            f.write(f"2 {h:.17g} {nx} {ny}\n")
            for j in range(ny):
                f.write("".join("1" if v else "0" for v in active[:, j]) + "\n")


def parse_shape(text, dim=None):
    """Parse a mini-language shape spec.

    ``dim`` disambiguates specs whose argument count is dimension-dependent
    (slab); elsewhere the argument count decides.
    """
    text = text.strip()
    if ":" not in text:
        raise ShapeError(f"malformed shape spec {text!r}")
    kind, _, rest = text.partition(":")
    if kind == "punctured":
        parts = rest.split(";")
        if len(parts) < 2:
            raise ShapeError("punctured spec needs ';i[,j]' cell indices")
        inner = parse_shape(parts[0], dim=dim)
        cells = []
        for cell in parts[1:]:
            cells.append(tuple(int(v) for v in cell.split(",")))
        return Punctured(inner, cells)
    if kind == "mask":
        if not os.path.exists(rest):
            raise ShapeError(f"mask file not found: {rest}")
        return read_mask(rest)
    try:
        args = [float(v) for v in rest.split(",")] if rest else []
    except ValueError as exc:
        raise ShapeError(f"bad numeric arguments in {text!r}: {exc}") from exc
    if kind == "interval" and len(args) == 2:
        return Interval(*args)
    if kind == "ball" and len(args) in (2, 3):
        return Ball(args[:-1], args[-1])
    if kind == "rect" and len(args) == 4:
        return Rectangle(*args)
    if kind == "annulus" and len(args) in (3, 4):
        return Annulus(args[:-2], args[-2], args[-1])
    if kind == "slab" and len(args) == 2:
        return Slab(args[0], args[1], dim=dim or 2)
    raise ShapeError(f"unknown or malformed shape spec {text!r}")
