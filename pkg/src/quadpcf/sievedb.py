"""Per-prime database of normal-form maps and the multi-prime period sieve.

For each odd prime p and each pair (b, c) in F_p^2, the database stores the
critical points of the family map [2x^2+bxy+by^2, -x^2+(4-b)xy+cy^2] and
the admissible global-period set of each, provided the map has degree 2 and
both critical points are F_p-rational; all other pairs are absent.

The sieve enumerates sigma-pairs up to height bounds, builds the normal
form, and intersects the per-critical-point period sets across good primes;
a candidate dies the moment an intersection empties.

On disk a database is a single versioned binary file: a header with the
prime list, then per-prime blocks of a presence bitmap plus fixed-width
records in (b, c) order.  Content is deterministic for a given prime list,
independent of worker count.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import divisors, isprime, primerange

from quadpcf import ffdyn
from quadpcf.exact_arith import ExtendedRational, enumerate_rationals
from quadpcf.ffdyn import FpMap, PeriodSet, format_fp_point
from quadpcf.projmap import NormalizedQuadMap

MAGIC = b"QPCFSDB\x01"
FORMAT_VERSION = 1

RECORD_DTYPE = np.dtype([
    ("c1", "<u2"), ("c2", "<u2"),
    ("m1", "<u2"), ("m2", "<u2"),
    ("mr1", "<u4"), ("mr2", "<u4"),
])
assert RECORD_DTYPE.itemsize == 16

NO_POINT = 0xFFFF


class DbError(Exception):
    pass


class DbMissingError(DbError):
    """The database file does not exist or is unreadable."""


class DbFormatError(DbError):
    """The file is not a complete database in the expected format."""


class UncoveredPrimeError(DbError):
    """A lookup asked for a prime the database was not built for."""


class DbConsistencyError(DbError):
    """The database contradicts a build invariant (hard internal error)."""


class _Absent:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ABSENT"

    def __bool__(self):
        return False


ABSENT = _Absent()


def first_odd_primes(count: int) -> Tuple[int, ...]:
    out = []
    for p in primerange(3, 10 ** 9):
        out.append(int(p))
        if len(out) == count:
            break
    return tuple(out)


def odd_primes_up_to(bound: int) -> Tuple[int, ...]:
    return tuple(int(p) for p in primerange(3, bound + 1))


@dataclass(frozen=True)
class DbKey:
    p: int
    b: int
    c: int


@dataclass(frozen=True)
class DbEntry:
    """Critical points of one reduced map with their admissible period sets.

    Points use the integer index encoding (p for infinity), ascending, and
    there are one or two of them depending on whether the reduced wronskian
    had a repeated root.
    """

    p: int
    points: Tuple[int, ...]
    period_sets: Tuple[PeriodSet, ...]

    def periods_for(self, point_index: int) -> PeriodSet:
        for pt, per in zip(self.points, self.period_sets):
            if pt == point_index:
                return per
        raise DbConsistencyError(
            f"point {format_fp_point(point_index, self.p)} not among stored "
            f"critical points {self.points} (p={self.p})")

    def text(self) -> str:
        cols = []
        for pt, per in zip(self.points, self.period_sets):
            per_text = ",".join(str(x) for x in sorted(per))
            cols.append(f"{format_fp_point(pt, self.p)}:{{{per_text}}}")
        return "\t".join(cols)


# ----------------------------------------------------------------------
# per-prime block construction
# ----------------------------------------------------------------------

def _record(pts_pers) -> tuple:
    """Pack [(point, m, mr), ...] (1 or 2 items) into a record tuple."""
    (c1, m1, mr1) = pts_pers[0]
    if len(pts_pers) == 2:
        (c2, m2, mr2) = pts_pers[1]
    else:
        c2, m2, mr2 = NO_POINT, 0, 0
    return (c1, c2, m1, m2, mr1, mr2)


def build_prime_block_scalar(p: int) -> "PrimeBlock":
    """Reference builder: plain loops over (b, c) with exact orbit splits."""
    nbits = p * p
    bitmap = np.zeros((nbits + 63) // 64, dtype=np.uint64)
    records = []
    for b in range(p):
        for c in range(p):
            if FpMap.family_resultant(p, b, c) == 0:
                continue
            fmap = FpMap.from_bc(p, b, c)
            crit = fmap.critical_point_indices()
            if crit is None:
                continue
            per = []
            for pt in crit:
                o = ffdyn.orbit_data(fmap, pt)
                if o.lam == 0 or o.r == 1:
                    per.append((pt, o.m, 0))
                else:
                    per.append((pt, o.m, o.m * o.r))
            idx = b * p + c
            bitmap[idx >> 6] |= np.uint64(1 << (idx & 63))
            records.append(_record(per))
    rec_arr = np.array(records, dtype=RECORD_DTYPE) if records else np.empty(0, RECORD_DTYPE)
    return PrimeBlock(p, bitmap, rec_arr)


# -- vectorized builder ---------------------------------------------------

def _mod_tables(p: int):
    inv = np.zeros(p, dtype=np.int64)
    if p > 1:
        inv[1] = 1
    for i in range(2, p):
        inv[i] = (-(p // i) * inv[p % i]) % p
    sq = np.full(p, -1, dtype=np.int64)
    xs = np.arange((p - 1) // 2 + 1, dtype=np.int64)
    sq[(xs * xs) % p] = xs
    order = np.zeros(p, dtype=np.int64)
    divs = divisors(p - 1)
    for a in range(1, p):
        for d in divs:
            if pow(a, d, p) == 1:
                order[a] = d
                break
    return inv, sq, order


def _family_step(z, b, c, p, inv):
    """Vectorized map evaluation on index-encoded points (p = infinity)."""
    aff = z != p
    zz = np.where(aff, z, 0)
    num = (2 * zz * zz + b * zz + b) % p
    den = (-(zz * zz) + (4 - b) * zz + c) % p
    out = np.where(den == 0, p, (num * inv[den]) % p)
    return np.where(aff, out, p - 2)


def _family_deriv(z, b, c, p, inv):
    """Vectorized chart-correct derivative factor; g2 = -1 in this family."""
    aff = z != p
    zz = np.where(aff, z, 0)
    w2 = (8 - b) % p
    n_val = (w2 * zz * zz + (2 * b + 4 * c) * zz + b * (c + b - 4)) % p
    den = (-(zz * zz) + (4 - b) * zz + c) % p
    f_val = (2 * zz * zz + b * zz + b) % p
    fin = np.where(den == 0,
                   (-n_val * inv[f_val] % p) * inv[f_val] % p,
                   (n_val * inv[den] % p) * inv[den] % p)
    # from infinity: (f1*g2 - f2*g1) / g2^2 with g2 = -1 -> b - 8
    return np.where(aff, fin, (b - 8) % p)


def _vector_cycles(p, b, c, z0, inv):
    """Cycle length and cycle multiplier for each lane, by Brent's method."""
    n = len(z0)
    lam_out = np.zeros(n, dtype=np.int64)
    mult_out = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    bw, cw = b.copy(), c.copy()
    tort = z0.copy()
    hare = _family_step(z0, bw, cw, p, inv)
    power = np.ones(n, dtype=np.int64)
    lam = np.ones(n, dtype=np.int64)
    while len(idx):
        done = tort == hare
        if done.any():
            lane = idx[done]
            lam_out[lane] = lam[done]
            mult_out[lane] = hare[done]  # stash the on-cycle point for phase 2
            keep = ~done
            idx, bw, cw = idx[keep], bw[keep], cw[keep]
            tort, hare = tort[keep], hare[keep]
            power, lam = power[keep], lam[keep]
            if not len(idx):
                break
        tp = power == lam
        if tp.any():
            tort[tp] = hare[tp]
            power[tp] <<= 1
            lam[tp] = 0
        hare = _family_step(hare, bw, cw, p, inv)
        lam += 1
    # phase 2: walk each cycle once, multiplying derivative factors
    cur = mult_out.copy()
    remaining = lam_out.copy()
    mult = np.ones(n, dtype=np.int64)
    idx = np.flatnonzero(remaining > 0)
    bw, cw, cur_w, rem_w = b[idx], c[idx], cur[idx], remaining[idx]
    mult_w = np.ones(len(idx), dtype=np.int64)
    while len(idx):
        f = _family_deriv(cur_w, bw, cw, p, inv)
        mult_w = (mult_w * f) % p
        cur_w = _family_step(cur_w, bw, cw, p, inv)
        rem_w -= 1
        done = rem_w == 0
        if done.any():
            mult[idx[done]] = mult_w[done]
            keep = ~done
            idx, bw, cw = idx[keep], bw[keep], cw[keep]
            cur_w, rem_w, mult_w = cur_w[keep], rem_w[keep], mult_w[keep]
    return lam_out, mult


def build_prime_block_fast(p: int) -> "PrimeBlock":
    """numpy builder over all (b, c) lanes at once; equals the scalar build."""
    inv, sq, order = _mod_tables(p)
    b = np.repeat(np.arange(p, dtype=np.int64), p)
    c = np.tile(np.arange(p, dtype=np.int64), p)
    res = (4 * c * c - 4 * b * c + b * b * c + b ** 3 - 11 * b * b + 32 * b) % p
    deg2 = res != 0
    w2 = (8 - b) % p
    w1 = (2 * b + 4 * c) % p
    w0 = (b * (c + b - 4)) % p
    quad = deg2 & (w2 != 0)
    disc = (w1 * w1 - 4 * w2 * w0) % p
    sqd = np.where(quad, sq[disc], -1)
    lin = deg2 & (w2 == 0)
    if lin.any() and (w1[lin] == 0).any():
        raise AssertionError("degenerate wronskian on a degree-2 lane")
    include = (quad & (sqd >= 0)) | lin
    i2w2 = inv[(2 * w2) % p]
    r_lo = ((sqd - w1) % p) * i2w2 % p
    r_hi = ((-sqd - w1) % p) * i2w2 % p
    lo = np.minimum(r_lo, r_hi)
    hi = np.maximum(r_lo, r_hi)
    # critical pair per included lane, ascending, infinity (= p) last
    c1 = np.where(lin, (-w0 * inv[np.where(lin, w1, 1)]) % p, lo)
    c2 = np.where(lin, p, hi)
    # a separable degree-2 map cannot have a repeated critical point, but a
    # repeated wronskian root is stored as a single pair if it ever appears
    single = include & quad & (lo == hi)
    sel = np.flatnonzero(include)
    b_s, c_s = b[sel], c[sel]
    m1, mult1 = _vector_cycles(p, b_s, c_s, c1[sel], inv)
    m2, mult2 = _vector_cycles(p, b_s, c_s, c2[sel], inv)
    r1 = np.where(mult1 > 0, order[mult1], 0)
    r2 = np.where(mult2 > 0, order[mult2], 0)
    mr1 = np.where(r1 > 1, m1 * r1, 0)
    mr2 = np.where(r2 > 1, m2 * r2, 0)
    single_s = single[sel]
    records = np.empty(len(sel), dtype=RECORD_DTYPE)
    records["c1"] = c1[sel]
    records["c2"] = np.where(single_s, NO_POINT, c2[sel])
    records["m1"] = m1
    records["m2"] = np.where(single_s, 0, m2)
    records["mr1"] = mr1
    records["mr2"] = np.where(single_s, 0, mr2)
    nbits = p * p
    bitmap = np.zeros((nbits + 63) // 64, dtype=np.uint64)
    word = sel >> 6
    np.bitwise_or.at(bitmap, word, np.uint64(1) << (sel & 63).astype(np.uint64))
    return PrimeBlock(p, bitmap, records)


# ----------------------------------------------------------------------
# blocks, rank index, file format
# ----------------------------------------------------------------------

_POPCOUNT_BYTE = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint16)


class PrimeBlock:
    """All database entries for one prime: bitmap + packed records."""

    def __init__(self, p: int, bitmap: np.ndarray, records: np.ndarray):
        self.p = p
        self.bitmap = bitmap
        self.records = records
        counts = _POPCOUNT_BYTE[bitmap.view(np.uint8)].reshape(-1, 8).sum(axis=1)
        self.rank = np.concatenate(([0], np.cumsum(counts, dtype=np.int64)))
        if self.rank[-1] != len(records):
            raise DbFormatError(
                f"bitmap population {self.rank[-1]} != record count {len(records)} "
                f"for p={p}")

    def lookup(self, b: int, c: int):
        idx = b * self.p + c
        word = idx >> 6
        bit = idx & 63
        w = int(self.bitmap[word])
        if not (w >> bit) & 1:
            return ABSENT
        pos = int(self.rank[word]) + (w & ((1 << bit) - 1)).bit_count()
        rec = self.records[pos]
        pts = [int(rec["c1"])]
        pers = [_unpack_period_set(int(rec["m1"]), int(rec["mr1"]))]
        if int(rec["c2"]) != NO_POINT:
            pts.append(int(rec["c2"]))
            pers.append(_unpack_period_set(int(rec["m2"]), int(rec["mr2"])))
        return DbEntry(p=self.p, points=tuple(pts), period_sets=tuple(pers))

    def iter_entries(self):
        sel = np.flatnonzero(
            np.unpackbits(self.bitmap.view(np.uint8), bitorder="little"))
        for idx, rec in zip(sel, self.records):
            b, c = divmod(int(idx), self.p)
            yield (b, c, self.lookup(b, c))

    def tobytes(self) -> bytes:
        head = struct.pack("<IQ", self.p, len(self.records))
        return head + self.bitmap.tobytes() + self.records.tobytes()


def _unpack_period_set(m: int, mr: int) -> PeriodSet:
    if mr == 0:
        return frozenset((m,))
    return frozenset((m, mr))


def _build_block(args):
    p, method = args
    if method == "scalar":
        return build_prime_block_scalar(p)
    return build_prime_block_fast(p)


class Database:
    """Mapping (p, b, c) -> DbEntry, persistent and read-only once built."""

    def __init__(self, primes: Sequence[int], blocks: Optional[Dict[int, PrimeBlock]] = None,
                 path: Optional[str] = None, offsets: Optional[Dict[int, int]] = None):
        self.primes = tuple(int(p) for p in primes)
        self._blocks = blocks if blocks is not None else {}
        self._path = path
        self._offsets = offsets or {}

    # -- queries ----------------------------------------------------------

    def covers(self, p: int) -> bool:
        return p in set(self.primes)

    def lookup(self, p: int, b: int, c: int):
        """DbEntry, or ABSENT for pairs excluded at build time."""
        block = self._block(p)
        return block.lookup(b % p, c % p)

    def lookup_key(self, key: DbKey):
        return self.lookup(key.p, key.b, key.c)

    def entry_count(self, p: int) -> int:
        return len(self._block(p).records)

    def _block(self, p: int) -> PrimeBlock:
        if p not in self._blocks:
            if p not in self._offsets:
                raise UncoveredPrimeError(f"prime {p} is not covered by this database")
            self._blocks[p] = self._load_block(p)
        return self._blocks[p]

    # -- file I/O -----------------------------------------------------------

    def save(self, path: str) -> None:
        """Write atomically; a partially written file is never left behind."""
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", FORMAT_VERSION, len(self.primes)))
            fh.write(struct.pack(f"<{len(self.primes)}I", *self.primes))
            for p in self.primes:
                fh.write(self._block(p).tobytes())
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)

    @staticmethod
    def load(path: str) -> "Database":
        if not os.path.exists(path):
            raise DbMissingError(f"database file not found: {path}")
        with open(path, "rb") as fh:
            head = fh.read(len(MAGIC))
            if head != MAGIC:
                raise DbFormatError(f"bad magic in {path}")
            version, nprimes = struct.unpack("<II", fh.read(8))
            if version != FORMAT_VERSION:
                raise DbFormatError(f"unsupported db version {version}")
            primes = struct.unpack(f"<{nprimes}I", fh.read(4 * nprimes))
            offsets = {}
            pos = fh.tell()
            size = os.fstat(fh.fileno()).st_size
            for p in primes:
                offsets[p] = pos
                fh.seek(pos)
                blk_p, nrec = struct.unpack("<IQ", fh.read(12))
                if blk_p != p:
                    raise DbFormatError(f"block for prime {blk_p} where {p} expected")
                nwords = (p * p + 63) // 64
                pos += 12 + nwords * 8 + nrec * RECORD_DTYPE.itemsize
            if pos != size:
                raise DbFormatError(
                    f"file length {size} does not match block layout end {pos}; "
                    "refusing a partial database")
        return Database(primes, blocks={}, path=path, offsets=offsets)

    def _load_block(self, p: int) -> PrimeBlock:
        with open(self._path, "rb") as fh:
            fh.seek(self._offsets[p])
            blk_p, nrec = struct.unpack("<IQ", fh.read(12))
            nwords = (p * p + 63) // 64
            bitmap = np.frombuffer(fh.read(nwords * 8), dtype="<u8").copy()
            records = np.frombuffer(
                fh.read(nrec * RECORD_DTYPE.itemsize), dtype=RECORD_DTYPE).copy()
        return PrimeBlock(p, bitmap, records)

    # -- text dump -----------------------------------------------------------

    def dump_text(self, fh) -> None:
        """Lossless line-oriented dump, one record per line."""
        fh.write("# quadpcf-db text dump v1\n")
        fh.write("# primes: " + " ".join(str(p) for p in self.primes) + "\n")
        for p in self.primes:
            for b, c, entry in self._block(p).iter_entries():
                fh.write(f"{p}\t{b}\t{c}\t{entry.text()}\n")

    @staticmethod
    def parse_text(fh) -> "Database":
        primes: Tuple[int, ...] = ()
        rows: Dict[int, list] = {}
        for line in fh:
            line = line.strip()
            if line.startswith("# primes:"):
                primes = tuple(int(x) for x in line.split(":", 1)[1].split())
                rows = {p: [] for p in primes}
                continue
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            p, b, c = int(parts[0]), int(parts[1]), int(parts[2])
            pts_pers = []
            for cell in parts[3:]:
                pt_text, per_text = cell.split(":", 1)
                pt = p if pt_text == "inf" else int(pt_text)
                per = sorted(int(x) for x in per_text.strip("{}").split(","))
                m = per[0]
                mr = per[1] if len(per) == 2 else 0
                pts_pers.append((pt, m, mr))
            rows[p].append((b * p + c, _record(pts_pers)))
        blocks = {}
        for p in primes:
            rows[p].sort()
            bitmap = np.zeros((p * p + 63) // 64, dtype=np.uint64)
            for idx, _ in rows[p]:
                bitmap[idx >> 6] |= np.uint64(1 << (idx & 63))
            recs = np.array([r for _, r in rows[p]], dtype=RECORD_DTYPE) \
                if rows[p] else np.empty(0, RECORD_DTYPE)
            blocks[p] = PrimeBlock(p, bitmap, recs)
        return Database(primes, blocks=blocks)


def build_db(primes: Sequence[int], path: Optional[str] = None,
             workers: int = 1, method: str = "fast") -> Database:
    """Build the database for the given odd primes (Algorithm: build once,
    per prime, all (b, c) pairs with degree 2 and split wronskian).

    Blocks are built per prime and merged in list order, so the result is
    byte-identical for any worker count.
    """
    primes = tuple(int(p) for p in primes)
    if len(set(primes)) != len(primes):
        raise ValueError("primes must be distinct")
    for p in primes:
        if p == 2 or not isprime(p):
            raise ValueError(f"need odd primes, got {p}")
    if method not in ("fast", "scalar"):
        raise ValueError(f"unknown build method {method!r}")
    jobs = [(p, method) for p in primes]
    if workers > 1 and len(primes) > 1:
        import multiprocessing as mp
        with mp.get_context("spawn").Pool(workers) as pool:
            block_list = pool.map(_build_block, jobs)
    else:
        block_list = [_build_block(j) for j in jobs]
    blocks = {p: blk for p, blk in zip(primes, block_list)}
    db = Database(primes, blocks=blocks)
    if path is not None:
        db.save(path)
        db = Database.load(path)
    return db


# ----------------------------------------------------------------------
# the sieve (Algorithms 2-4)
# ----------------------------------------------------------------------

def _sigma_mod_p(s: ExtendedRational, p: int) -> int:
    if s.den % p == 0:
        raise DbConsistencyError(
            f"sigma denominator divisible by good prime {p}; resultant guard failed")
    return s.num * pow(s.den, p - 2, p) % p


def family_key(s1: ExtendedRational, s2: ExtendedRational, p: int) -> DbKey:
    """(b, c) key of the reduction of the normal-form map at a good prime."""
    s1p = _sigma_mod_p(s1, p)
    s2p = _sigma_mod_p(s2, p)
    return DbKey(p, (2 - s1p) % p, (2 - s1p - s2p) % p)


def reduce_rational_point(x: ExtendedRational, p: int) -> int:
    """Index of the reduction of a point of P^1(Q) mod p (p encodes infinity)."""
    if x.is_infinity() or x.den % p == 0:
        return p
    return x.num * pow(x.den, p - 2, p) % p


@dataclass
class CheckResult:
    ok: bool
    period_sets: Optional[Tuple[Optional[PeriodSet], ...]]
    primes_used: int
    killed_by: Optional[int] = None

    @property
    def no_modular_info(self) -> bool:
        return self.primes_used == 0


def _sigmas_of(phi: NormalizedQuadMap):
    if phi.sigmas is not None:
        return phi.sigmas
    return phi.sigma_invariants()


def check_rational_periods(phi: NormalizedQuadMap, gamma1, gamma2,
                           primes: Sequence[int], res: int,
                           db: Database) -> bool:
    return check_rational_periods_detailed(phi, gamma1, gamma2, primes, res, db).ok


def check_rational_periods_detailed(phi, gamma1, gamma2, primes, res, db) -> CheckResult:
    """Intersect admissible period sets of two rational critical points.

    Each critical point keeps an independent running set (the two orbits can
    terminate in cycles of different lengths); the first empty intersection
    refutes the map.  ABSENT entries at good primes are impossible for maps
    with rational critical points and raise DbConsistencyError.
    """
    if res == 0:
        raise ValueError("resultant must be nonzero")
    s1, s2 = _sigmas_of(phi)
    running: List[Optional[frozenset]] = [None, None]
    used = 0
    for p in primes:
        if res % p == 0:
            continue
        key = family_key(s1, s2, p)
        entry = db.lookup(key.p, key.b, key.c)
        if entry is ABSENT:
            raise DbConsistencyError(
                f"entry absent at good prime {p} for map with rational critical "
                f"points (key {key}); database and build invariant disagree")
        used += 1
        for i, gamma in enumerate((gamma1, gamma2)):
            reduced = reduce_rational_point(gamma, p)
            per = entry.periods_for(reduced)
            running[i] = per if running[i] is None else running[i] & per
            if not running[i]:
                return CheckResult(False, tuple(running), used, killed_by=p)
    return CheckResult(True, tuple(running), used)


def check_irrational_periods(phi: NormalizedQuadMap, primes: Sequence[int],
                             res: int, db: Database) -> bool:
    return check_irrational_periods_detailed(phi, primes, res, db).ok


def check_irrational_periods_detailed(phi, primes, res, db) -> CheckResult:
    """One shared running set for conjugate irrational critical points.

    Conjugate orbits terminate in cycles of the same length, so one set
    serves both.  Reduced maps absent from the database contribute nothing;
    a candidate that never hits a present entry is reported as surviving
    with no modular information rather than silently passing.
    """
    if res == 0:
        raise ValueError("resultant must be nonzero")
    s1, s2 = _sigmas_of(phi)
    running: Optional[frozenset] = None
    used = 0
    for p in primes:
        if res % p == 0:
            continue
        key = family_key(s1, s2, p)
        entry = db.lookup(key.p, key.b, key.c)
        if entry is ABSENT:
            continue
        used += 1
        inter = entry.period_sets[0]
        for per in entry.period_sets[1:]:
            inter = inter & per
        running = inter if running is None else running & inter
        if not running:
            return CheckResult(False, (running,), used, killed_by=p)
    return CheckResult(True, (running,), used)


@dataclass
class SieveCandidate:
    """A sigma-pair that survived every prime of the sieve."""

    sigma1: ExtendedRational
    sigma2: ExtendedRational
    phi: NormalizedQuadMap
    resultant: int
    critical_rational: bool
    period_sets: Tuple[Optional[PeriodSet], ...]
    primes_used: int

    @property
    def no_modular_info(self) -> bool:
        return self.primes_used == 0

    def tsv_line(self) -> str:
        sets = ";".join(
            "unconstrained" if s is None else
            "{" + ",".join(str(x) for x in sorted(s)) + "}"
            for s in self.period_sets)
        flag = "rational" if self.critical_rational else "irrational"
        return "\t".join([
            str(self.sigma1), str(self.sigma2), str(self.phi),
            str(self.resultant), flag, sets, str(self.primes_used),
        ])

    @staticmethod
    def tsv_header() -> str:
        return "\t".join(["sigma1", "sigma2", "map", "resultant",
                          "critical_points", "period_sets", "primes_used"])


def examine_pair(s1: ExtendedRational, s2: ExtendedRational,
                 primes: Sequence[int], db: Database) -> Optional[SieveCandidate]:
    """Run one sigma-pair through the sieve; None if skipped or refuted."""
    phi = NormalizedQuadMap.from_sigmas(s1, s2)
    res = phi.resultant()
    if res == 0:
        return None
    crit = phi.critical_point_data(need_points=False)
    if crit.rational:
        result = check_rational_periods_detailed(
            phi, crit.points[0], crit.points[1], primes, res, db)
    else:
        result = check_irrational_periods_detailed(phi, primes, res, db)
    if not result.ok:
        return None
    return SieveCandidate(
        sigma1=s1, sigma2=s2, phi=phi, resultant=res,
        critical_rational=crit.rational,
        period_sets=result.period_sets, primes_used=result.primes_used)


_WORKER_STATE: dict = {}


def _sieve_worker_init(db_path, primes):
    _WORKER_STATE["db"] = Database.load(db_path)
    _WORKER_STATE["primes"] = primes


def _sieve_worker_chunk(args):
    s1_text, s2_texts = args
    db = _WORKER_STATE["db"]
    primes = _WORKER_STATE["primes"]
    s1 = ExtendedRational.from_str(s1_text)
    out = []
    for s2_text in s2_texts:
        cand = examine_pair(s1, ExtendedRational.from_str(s2_text), primes, db)
        if cand is not None:
            out.append(cand)
    return out


def sieve(h1: int, h2: int, primes: Sequence[int], db: Database,
          workers: int = 1) -> List[SieveCandidate]:
    """Find all possibly-PCF sigma-pairs with heights up to (h1, h2).

    Enumeration order of pairs is fixed by enumerate_rationals, so the
    survivor list is deterministic for any worker count.
    """
    primes = tuple(primes)
    for p in primes:
        if not db.covers(p):
            raise UncoveredPrimeError(f"prime {p} not covered by database")
    sigma1_list = list(enumerate_rationals(h1))
    sigma2_list = list(enumerate_rationals(h2))
    if workers > 1 and db._path is not None:
        import multiprocessing as mp
        s2_texts = [str(s) for s in sigma2_list]
        jobs = [(str(s1), s2_texts) for s1 in sigma1_list]
        with mp.get_context("spawn").Pool(
                workers, initializer=_sieve_worker_init,
                initargs=(db._path, primes)) as pool:
            survivors: List[SieveCandidate] = []
            for chunk in pool.imap(_sieve_worker_chunk, jobs):
                survivors.extend(chunk)
            return survivors
    survivors = []
    for s1 in sigma1_list:
        for s2 in sigma2_list:
            cand = examine_pair(s1, s2, primes, db)
            if cand is not None:
                survivors.append(cand)
    return survivors
