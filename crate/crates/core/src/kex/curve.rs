use rand::{Rng, RngCore};

use super::KexError;
use crate::lattice::is_prime;

/// `y² = x³ + ax + b` over `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveParams {
    pub q: u64,
    pub a: u64,
    pub b: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Infinity,
    Affine { x: u64, y: u64 },
}

impl CurveParams {
    pub fn new(q: u64, a: u64, b: u64) -> Result<Self, KexError> {
        if q < 5 || q >= 1 << 31 || !is_prime(q) {
            return Err(KexError::InvalidCurve(format!("q = {q} is not a prime in [5, 2^31)")));
        }
        let (a, b) = (a % q, b % q);
        let disc = (4 * mul(mul(a, a, q), a, q) + 27 * mul(b, b, q)) % q;
        if disc == 0 {
            return Err(KexError::InvalidCurve(format!("singular curve a={a} b={b} mod {q}")));
        }
        Ok(CurveParams { q, a, b })
    }

    pub fn contains(&self, p: &Point) -> bool {
        match *p {
            Point::Infinity => true,
            Point::Affine { x, y } => x < self.q && y < self.q && mul(y, y, self.q) == self.rhs(x),
        }
    }

    fn rhs(&self, x: u64) -> u64 {
        let q = self.q;
        (mul(mul(x, x, q), x, q) + mul(self.a, x, q) + self.b) % q
    }

    fn check(&self, p: &Point) -> Result<(), KexError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(KexError::PointNotOnCurve)
        }
    }
}

fn mul(a: u64, b: u64, q: u64) -> u64 {
    a * b % q
}

fn inv(a: u64, q: u64) -> u64 {
    crate::sigma::mod_pow(a, q - 2, q)
}

pub fn point_neg(p: &Point, curve: &CurveParams) -> Point {
    match *p {
        Point::Infinity => Point::Infinity,
        Point::Affine { x, y } => Point::Affine {
            x,
            y: (curve.q - y) % curve.q,
        },
    }
}

/// Chord-and-tangent addition with `O` as identity.
pub fn point_add(p1: &Point, p2: &Point, curve: &CurveParams) -> Result<Point, KexError> {
    curve.check(p1)?;
    curve.check(p2)?;
    Ok(add_unchecked(p1, p2, curve))
}

fn add_unchecked(p1: &Point, p2: &Point, curve: &CurveParams) -> Point {
    let q = curve.q;
    let (x1, y1, x2, y2) = match (*p1, *p2) {
        (Point::Infinity, p) | (p, Point::Infinity) => return p,
        (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
    };
    let lambda = if x1 == x2 {
        if (y1 + y2) % q == 0 {
            return Point::Infinity;
        }
        // tangent: (3x² + a) / 2y
        mul((3 * mul(x1, x1, q) + curve.a) % q, inv(2 * y1 % q, q), q)
    } else {
        mul((y2 + q - y1) % q, inv((x2 + q - x1) % q, q), q)
    };
    let x3 = (mul(lambda, lambda, q) + 2 * q - x1 - x2) % q;
    let y3 = (mul(lambda, (x1 + q - x3) % q, q) + q - y1) % q;
    Point::Affine { x: x3, y: y3 }
}

/// `k·P` by double-and-add.
pub fn scalar_mul(k: u64, p: &Point, curve: &CurveParams) -> Result<Point, KexError> {
    curve.check(p)?;
    let mut acc = Point::Infinity;
    let mut base = *p;
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = add_unchecked(&acc, &base, curve);
        }
        base = add_unchecked(&base, &base, curve);
        k >>= 1;
    }
    Ok(acc)
}

/// All points including `O`, affine points sorted by `(x, y)` after `O`.
pub fn enumerate_points(curve: &CurveParams) -> Result<Vec<Point>, KexError> {
    if curve.q > 10_000 {
        return Err(KexError::TooLarge(format!("q = {} exceeds 10^4", curve.q)));
    }
    let q = curve.q;
    let mut roots: Vec<Vec<u64>> = vec![Vec::new(); q as usize];
    for y in 0..q {
        roots[mul(y, y, q) as usize].push(y);
    }
    let mut out = vec![Point::Infinity];
    for x in 0..q {
        for &y in &roots[curve.rhs(x) as usize] {
            out.push(Point::Affine { x, y });
        }
    }
    Ok(out)
}

/// Smallest `n >= 1` with `n·G = O`, by repeated addition.
pub fn point_order(g: &Point, curve: &CurveParams) -> Result<u64, KexError> {
    curve.check(g)?;
    let mut n = 1;
    let mut acc = *g;
    while acc != Point::Infinity {
        acc = add_unchecked(&acc, g, curve);
        n += 1;
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcdhTranscript {
    pub n_a: u64,
    pub n_b: u64,
    pub p_a: Point,
    pub p_b: Point,
    pub k_a: Point,
    pub k_b: Point,
}

/// Both parties pick scalars in `[1, n)`, exchange `n·G`, and multiply the
/// peer's point by their own scalar.
pub fn ecdh_exchange(
    curve: &CurveParams,
    g: &Point,
    rng_a: &mut dyn RngCore,
    rng_b: &mut dyn RngCore,
) -> Result<EcdhTranscript, KexError> {
    let n = point_order(g, curve)?;
    if n <= 2 {
        return Err(KexError::InvalidCurve(format!("base point order {n} is too small")));
    }
    let n_a = rng_a.gen_range(1..n);
    let n_b = rng_b.gen_range(1..n);
    ecdh_exchange_with_scalars(curve, g, n_a, n_b)
}

pub fn ecdh_exchange_with_scalars(
    curve: &CurveParams,
    g: &Point,
    n_a: u64,
    n_b: u64,
) -> Result<EcdhTranscript, KexError> {
    let p_a = scalar_mul(n_a, g, curve)?;
    let p_b = scalar_mul(n_b, g, curve)?;
    Ok(EcdhTranscript {
        n_a,
        n_b,
        k_a: scalar_mul(n_a, &p_b, curve)?,
        k_b: scalar_mul(n_b, &p_a, curve)?,
        p_a,
        p_b,
    })
}

/// A curve together with a base point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveFixture {
    pub curve: CurveParams,
    pub g: Point,
}

pub const CURVES_TXT: &str = include_str!("../../data/curves.txt");

/// Parses `q a b Gx Gy` lines; `#` starts a comment.
pub fn parse_curves(text: &str) -> Result<Vec<CurveFixture>, KexError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<u64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| KexError::InvalidCurve(format!("line {}: {e}", i + 1)))?;
        let [q, a, b, x, y] = nums[..] else {
            return Err(KexError::InvalidCurve(format!("line {}: expected 5 fields", i + 1)));
        };
        let curve = CurveParams::new(q, a, b)?;
        let g = Point::Affine { x, y };
        curve.check(&g)?;
        out.push(CurveFixture { curve, g });
    }
    Ok(out)
}

pub fn builtin_curves() -> Vec<CurveFixture> {
    parse_curves(CURVES_TXT).expect("shipped curve fixtures are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn small() -> CurveFixture {
        builtin_curves()[0]
    }

    #[test]
    fn fixture_counts() {
        let counts: Vec<usize> = builtin_curves()
            .iter()
            .filter(|f| f.curve.q <= 10_000)
            .map(|f| enumerate_points(&f.curve).unwrap().len())
            .collect();
        assert_eq!(counts, vec![19, 10067, 7933]);
        for f in builtin_curves() {
            let count = enumerate_points(&f.curve).unwrap().len() as f64;
            let q = f.curve.q as f64;
            assert!((count - (q + 1.0)).abs() <= 2.0 * q.sqrt());
        }
    }

    #[test]
    fn identity_and_inverse() {
        let f = small();
        for p in enumerate_points(&f.curve).unwrap() {
            assert!(f.curve.contains(&p));
            assert_eq!(point_add(&p, &Point::Infinity, &f.curve).unwrap(), p);
            assert_eq!(point_add(&p, &point_neg(&p, &f.curve), &f.curve).unwrap(), Point::Infinity);
        }
        assert!(point_add(&Point::Affine { x: 0, y: 0 }, &f.g, &f.curve).is_err());
    }

    #[test]
    fn group_laws_exhaustively() {
        let f = small();
        let pts = enumerate_points(&f.curve).unwrap();
        let c = &f.curve;
        for a in &pts {
            for b in &pts {
                let ab = point_add(a, b, c).unwrap();
                assert_eq!(ab, point_add(b, a, c).unwrap());
                for d in &pts {
                    let left = point_add(&ab, d, c).unwrap();
                    let right = point_add(a, &point_add(b, d, c).unwrap(), c).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn scalar_mul_matches_repeated_addition() {
        for f in builtin_curves() {
            let mut acc = Point::Infinity;
            for k in 0..=20 {
                assert_eq!(scalar_mul(k, &f.g, &f.curve).unwrap(), acc);
                acc = point_add(&acc, &f.g, &f.curve).unwrap();
            }
        }
    }

    #[test]
    fn orders_divide_group_order() {
        let f = builtin_curves()[2];
        let pts = enumerate_points(&f.curve).unwrap();
        assert_eq!(point_order(&Point::Infinity, &f.curve).unwrap(), 1);
        for p in pts.iter().step_by(97) {
            let n = point_order(p, &f.curve).unwrap();
            assert_eq!(pts.len() as u64 % n, 0);
            assert_eq!(scalar_mul(n, p, &f.curve).unwrap(), Point::Infinity);
        }
    }

    #[test]
    fn exchange_agrees() {
        let f = small();
        let mut ra = ChaCha20Rng::seed_from_u64(1);
        let mut rb = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..100 {
            let t = ecdh_exchange(&f.curve, &f.g, &mut ra, &mut rb).unwrap();
            assert_eq!(t.k_a, t.k_b);
            // oracle: (n_a * n_b) additions of G
            let mut expect = Point::Infinity;
            for _ in 0..t.n_a * t.n_b {
                expect = point_add(&expect, &f.g, &f.curve).unwrap();
            }
            assert_eq!(t.k_a, expect);
        }
        let one = ecdh_exchange_with_scalars(&f.curve, &f.g, 1, 1).unwrap();
        assert_eq!(one.k_a, f.g);
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(CurveParams::new(17, 0, 0).is_err());
        assert!(CurveParams::new(15, 1, 1).is_err());
        assert!(parse_curves("17 2 2 5 2").is_err());
        assert!(parse_curves("17 2 2").is_err());
    }
}
