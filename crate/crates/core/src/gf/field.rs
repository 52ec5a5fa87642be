use super::GfError;
use std::fmt;

/// Field element: the canonical representative `Σ c_i·p^i` of the
/// polynomial `Σ c_i·x^i` over `GF(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fe(pub u16);

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Characteristic, extension degree and monic reduction polynomial
/// (coefficients from `x^0` up to `x^q`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub p: u32,
    pub q: u32,
    pub poly: Vec<u32>,
}

impl FieldSpec {
    pub fn order(&self) -> u32 {
        self.p.pow(self.q)
    }
}

/// `GF(p^q)` with log/antilog tables built once at construction.
#[derive(Clone)]
pub struct Field {
    spec: FieldSpec,
    order: u32,
    exp: Vec<u16>,
    log: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.spec.p, self.spec.q)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

fn is_prime(p: u32) -> bool {
    p >= 2
        && (2..)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Polynomial arithmetic used only while building the tables.
struct PolyRing<'a> {
    p: u32,
    q: usize,
    modulus: &'a [u32],
}

impl PolyRing<'_> {
    fn digits(&self, v: u32) -> Vec<u32> {
        let mut out = vec![0; self.q];
        let mut v = v;
        for d in out.iter_mut() {
            *d = v % self.p;
            v /= self.p;
        }
        out
    }

    fn value(&self, digits: &[u32]) -> u32 {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        let (a, b) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * self.q - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % self.p as u64;
            }
        }
        let p = self.p as u64;
        for deg in (self.q..prod.len()).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            for i in 0..self.q {
                let sub = c * self.modulus[i] as u64 % p;
                let idx = deg - self.q + i;
                prod[idx] = (prod[idx] + p - sub) % p;
            }
            prod[deg] = 0;
        }
        let low: Vec<u32> = prod[..self.q].iter().map(|&x| x as u32).collect();
        self.value(&low)
    }

    fn pow(&self, base: u32, mut e: u64) -> u32 {
        let mut acc = 1;
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }
}

/// Remainder of `f` divided by monic `h` over `GF(p)`; both low-to-high.
fn poly_rem(p: u32, f: &[u32], h: &[u32]) -> Vec<u32> {
    let mut r: Vec<u64> = f.iter().map(|&x| x as u64).collect();
    let dh = h.len() - 1;
    let p = p as u64;
    for deg in (dh..r.len()).rev() {
        let c = r[deg] % p;
        if c == 0 {
            continue;
        }
        for (i, &hc) in h.iter().enumerate() {
            let idx = deg - dh + i;
            r[idx] = (r[idx] + p - c * hc as u64 % p) % p;
        }
    }
    r.truncate(dh);
    r.into_iter().map(|x| x as u32).collect()
}

fn is_irreducible(p: u32, f: &[u32]) -> bool {
    let q = f.len() - 1;
    for deg in 1..=q / 2 {
        // every monic polynomial of this degree
        let count = p.pow(deg as u32);
        for v in 0..count {
            let mut h = Vec::with_capacity(deg + 1);
            let mut x = v;
            for _ in 0..deg {
                h.push(x % p);
                x /= p;
            }
            h.push(1);
            if poly_rem(p, f, &h).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// `GF(p^q)`. Without an explicit polynomial the first irreducible monic
    /// polynomial in counting order is used (`x^8+x^4+x^3+x^2+1` for
    /// `GF(2^8)`).
    pub fn new(p: u32, q: u32, poly: Option<Vec<u32>>) -> Result<Field, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if q == 0 {
            return Err(GfError::ZeroDegree);
        }
        let order = (p as u64).checked_pow(q).unwrap_or(u64::MAX);
        if order > 1 << 16 {
            return Err(GfError::OrderTooLarge { p, q });
        }
        let order = order as u32;
        let poly = match poly {
            Some(poly) => {
                if poly.len() != q as usize + 1 {
                    return Err(GfError::BadPolynomial(format!(
                        "expected {} coefficients, got {}",
                        q + 1,
                        poly.len()
                    )));
                }
                if poly[q as usize] != 1 {
                    return Err(GfError::BadPolynomial("not monic".into()));
                }
                if poly.iter().any(|&c| c >= p) {
                    return Err(GfError::BadPolynomial("coefficient ≥ p".into()));
                }
                if !is_irreducible(p, &poly) {
                    return Err(GfError::Reducible);
                }
                poly
            }
            None if p == 2 && q == 8 => vec![1, 0, 1, 1, 1, 0, 0, 0, 1],
            None => Self::first_irreducible(p, q),
        };
        let spec = FieldSpec { p, q, poly };
        Ok(Self::build(spec, order))
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Field, GfError> {
        Field::new(spec.p, spec.q, Some(spec.poly.clone()))
    }

    /// `GF(2^8)` with `x^8+x^4+x^3+x^2+1`, so one symbol is one byte.
    pub fn gf256() -> Field {
        Field::new(2, 8, None).expect("default GF(256) polynomial is irreducible")
    }

    pub fn prime(p: u32) -> Result<Field, GfError> {
        Field::new(p, 1, None)
    }

    fn first_irreducible(p: u32, q: u32) -> Vec<u32> {
        if q == 1 {
            return vec![0, 1];
        }
        let count = p.pow(q);
        (0..count)
            .map(|v| {
                let mut f = Vec::with_capacity(q as usize + 1);
                let mut x = v;
                for _ in 0..q {
                    f.push(x % p);
                    x /= p;
                }
                f.push(1);
                f
            })
            .find(|f| f[0] != 0 && is_irreducible(p, f))
            .expect("an irreducible polynomial of every degree exists")
    }

    fn build(spec: FieldSpec, order: u32) -> Field {
        let ring = PolyRing {
            p: spec.p,
            q: spec.q as usize,
            modulus: &spec.poly,
        };
        let group = order - 1;
        let factors = prime_factors(group);
        let generator = (1..order)
            .find(|&g| {
                ring.pow(g, group as u64) == 1
                    && factors
                        .iter()
                        .all(|&r| ring.pow(g, (group / r) as u64) != 1)
            })
            .expect("the multiplicative group of a field is cyclic");
        let mut exp = vec![0u16; 2 * group as usize];
        let mut log = vec![0u32; order as usize];
        let mut x = 1u32;
        for i in 0..group as usize {
            exp[i] = x as u16;
            exp[i + group as usize] = x as u16;
            log[x as usize] = i as u32;
            x = ring.mul(x, generator);
        }
        Field {
            spec,
            order,
            exp,
            log,
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn characteristic(&self) -> u32 {
        self.spec.p
    }

    pub fn zero(&self) -> Fe {
        Fe(0)
    }

    pub fn one(&self) -> Fe {
        Fe(1)
    }

    /// Element with canonical value `v`, if `v` is below the order.
    pub fn element(&self, v: u32) -> Option<Fe> {
        (v < self.order).then_some(Fe(v as u16))
    }

    fn digitwise(&self, a: Fe, b: Fe, f: impl Fn(u32, u32) -> u32) -> Fe {
        let p = self.spec.p;
        let (mut a, mut b) = (a.0 as u32, b.0 as u32);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.spec.q {
            out += f(a % p, b % p) % p * place;
            a /= p;
            b /= p;
            place *= p;
        }
        Fe(out as u16)
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.spec.p == 2 {
            Fe(a.0 ^ b.0)
        } else {
            self.digitwise(a, b, |x, y| x + y)
        }
    }

    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        if self.spec.p == 2 {
            Fe(a.0 ^ b.0)
        } else {
            let p = self.spec.p;
            self.digitwise(a, b, move |x, y| x + p - y)
        }
    }

    pub fn neg(&self, a: Fe) -> Fe {
        self.sub(Fe(0), a)
    }

    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe(0);
        }
        Fe(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, GfError> {
        if a.0 == 0 {
            return Err(GfError::ZeroInverse);
        }
        let group = self.order - 1;
        Ok(Fe(
            self.exp[((group - self.log[a.0 as usize]) % group) as usize]
        ))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe(1);
        }
        if a.0 == 0 {
            return Fe(0);
        }
        let group = (self.order - 1) as u64;
        let idx = (self.log[a.0 as usize] as u64 * (e % group)) % group;
        Fe(self.exp[idx as usize])
    }

    /// `acc + a·b`, the inner step of every dot product.
    pub fn mul_add(&self, acc: Fe, a: Fe, b: Fe) -> Fe {
        self.add(acc, self.mul(a, b))
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.order).map(|v| Fe(v as u16))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_axioms(f: &Field, pairs: impl Iterator<Item = (Fe, Fe, Fe)>) {
        for (a, b, c) in pairs {
            assert_eq!(f.add(a, b), f.add(b, a));
            assert_eq!(f.mul(a, b), f.mul(b, a));
            assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            assert_eq!(f.add(a, f.neg(a)), f.zero());
            assert_eq!(f.sub(f.add(a, b), b), a);
        }
    }

    #[test]
    fn prime_field_inverse() {
        let f = Field::prime(7).unwrap();
        assert_eq!(f.inv(Fe(3)).unwrap(), Fe(5));
        assert_eq!(f.inv(Fe(0)), Err(GfError::ZeroInverse));
    }

    #[test]
    fn gf8_product_without_reduction() {
        let f = Field::new(2, 3, Some(vec![1, 1, 0, 1])).unwrap();
        // x · (x + 1) = x² + x
        assert_eq!(f.mul(Fe(0b010), Fe(0b011)), Fe(0b110));
        // x · x² = x³ = x + 1
        assert_eq!(f.mul(Fe(0b010), Fe(0b100)), Fe(0b011));
    }

    #[test]
    fn additive_identity() {
        for f in [
            Field::gf256(),
            Field::prime(5).unwrap(),
            Field::new(3, 2, None).unwrap(),
        ] {
            for a in f.elements() {
                assert_eq!(f.add(a, f.zero()), a);
                assert_eq!(f.mul(a, f.one()), a);
            }
        }
    }

    #[test]
    fn default_gf256_polynomial() {
        let f = Field::gf256();
        assert_eq!(f.spec().poly, vec![1, 0, 1, 1, 1, 0, 0, 0, 1]);
        // x^8 reduces to x^4 + x^3 + x^2 + 1
        assert_eq!(f.mul(Fe(0x80), Fe(0x02)), Fe(0x1d));
    }

    #[test]
    fn exhaustive_axioms_small_fields() {
        for f in [
            Field::prime(2).unwrap(),
            Field::prime(7).unwrap(),
            Field::new(2, 3, None).unwrap(),
            Field::new(3, 2, None).unwrap(),
            Field::new(5, 2, None).unwrap(),
        ] {
            let els: Vec<Fe> = f.elements().collect();
            for &a in &els {
                if a.0 != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
                check_axioms(
                    &f,
                    els.iter()
                        .flat_map(|&b| els.iter().map(move |&c| (a, b, c))),
                );
            }
        }
    }

    #[test]
    fn exhaustive_inverses_and_pairs_gf256() {
        let f = Field::gf256();
        for a in f.elements().skip(1) {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for a in f.elements() {
            for b in f.elements() {
                let c = Fe(rng.gen_range(0..256));
                check_axioms(&f, std::iter::once((a, b, c)));
            }
        }
    }

    #[test]
    fn sampled_axioms_large_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for f in [
            Field::new(2, 16, None).unwrap(),
            Field::prime(65521).unwrap(),
            Field::new(3, 10, None).unwrap(),
        ] {
            let order = f.order();
            let triples: Vec<(Fe, Fe, Fe)> = (0..2000)
                .map(|_| {
                    (
                        Fe(rng.gen_range(0..order) as u16),
                        Fe(rng.gen_range(0..order) as u16),
                        Fe(rng.gen_range(0..order) as u16),
                    )
                })
                .collect();
            check_axioms(&f, triples.iter().copied());
            for &(a, _, _) in &triples {
                if a.0 != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(Field::prime(9).unwrap_err(), GfError::NotPrime(9));
        assert!(matches!(
            Field::new(2, 17, None),
            Err(GfError::OrderTooLarge { .. })
        ));
        assert!(matches!(
            Field::new(3, 11, None),
            Err(GfError::OrderTooLarge { .. })
        ));
        // x² + 1 = (x + 1)² over GF(2)
        assert_eq!(
            Field::new(2, 2, Some(vec![1, 0, 1])).unwrap_err(),
            GfError::Reducible
        );
        assert!(matches!(
            Field::new(2, 2, Some(vec![1, 1, 0])),
            Err(GfError::BadPolynomial(_))
        ));
        assert_eq!(Field::new(2, 0, None).unwrap_err(), GfError::ZeroDegree);
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let f = Field::new(3, 3, None).unwrap();
        for a in f.elements() {
            let mut acc = f.one();
            for e in 0..30u64 {
                assert_eq!(f.pow(a, e), acc);
                acc = f.mul(acc, a);
            }
        }
    }
}
