//! Galois rings GR(p^N, F) = (Z/p^N)[g] / (h(g)), h the lift of the
//! defining polynomial of F_{p^F} with coefficients in {0..p-1}.
//!
//! Elements are coordinate vectors on the basis 1, g, .., g^{F-1}. The j-th
//! p-adic digit of an element is the residue-field element whose coordinates
//! are the j-th base-p digits of the coordinates, so every element is
//! `sum_j [d_j] p^j` with `[d]` the polynomial-basis lift of a residue digit.

use super::irreducible::defining_polynomial;

pub type GrElem = Vec<u64>;

#[derive(Debug, Clone)]
pub struct GaloisRing {
    p: u64,
    degree: usize,
    precision: u32,
    modulus: u64,
    poly: Vec<u64>,
    /// `frob[k]` = image of g under the k-th power of the Frobenius lift.
    frob: Vec<GrElem>,
}

impl GaloisRing {
    pub fn new(p: u64, degree: usize, precision: u32) -> Self {
        assert!(degree >= 1 && precision >= 1);
        let modulus = p.checked_pow(precision).expect("p^N overflows u64");
        assert!(modulus < (1 << 31), "precision too large for u64 products");
        let poly = defining_polynomial(p, degree);
        let mut ring = GaloisRing {
            p,
            degree,
            precision,
            modulus,
            poly,
            frob: Vec::new(),
        };
        ring.frob = (0..degree).map(|k| ring.compute_frobenius_image(k)).collect();
        ring
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Size of the residue field.
    pub fn residue_size(&self) -> u64 {
        self.p.pow(self.degree as u32)
    }

    pub fn defining_poly(&self) -> &[u64] {
        &self.poly
    }

    pub fn zero(&self) -> GrElem {
        vec![0; self.degree]
    }

    pub fn one(&self) -> GrElem {
        self.from_int(1)
    }

    pub fn generator(&self) -> GrElem {
        if self.degree == 1 {
            // the basis is {1}; g is the root of the linear polynomial
            return self.from_int(-(self.poly[0] as i64));
        }
        let mut g = self.zero();
        g[1] = 1;
        g
    }

    pub fn from_int(&self, n: i64) -> GrElem {
        let mut a = self.zero();
        a[0] = n.rem_euclid(self.modulus as i64) as u64;
        a
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> GrElem {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x + y) % self.modulus)
            .collect()
    }

    pub fn neg(&self, a: &[u64]) -> GrElem {
        a.iter()
            .map(|&x| (self.modulus - x) % self.modulus)
            .collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> GrElem {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &[u64], k: u64) -> GrElem {
        let k = k % self.modulus;
        a.iter().map(|&x| x * k % self.modulus).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> GrElem {
        let n = self.degree;
        let m = self.modulus;
        let mut prod = vec![0u64; 2 * n - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y % m) % m;
            }
        }
        // reduce with g^n = -(h_0 + .. + h_{n-1} g^{n-1})
        for top in (n..2 * n - 1).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for k in 0..n {
                let t = c * self.poly[k] % m;
                let idx = top - n + k;
                prod[idx] = (prod[idx] + m - t) % m;
            }
        }
        prod.truncate(n);
        prod
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> GrElem {
        let mut base = a.to_vec();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_unit(&self, a: &[u64]) -> bool {
        a.iter().any(|&c| c % self.p != 0)
    }

    /// p-adic valuation, `precision` for zero.
    pub fn valuation(&self, a: &[u64]) -> u32 {
        (0..self.precision)
            .find(|&j| a.iter().any(|&c| (c / self.p.pow(j)) % self.p != 0))
            .unwrap_or(self.precision)
    }

    /// Inverse of a unit: residue inverse, then Newton `y <- y (2 - a y)`.
    pub fn inverse(&self, a: &[u64]) -> Option<GrElem> {
        if !self.is_unit(a) {
            return None;
        }
        let q = self.residue_size();
        let residue: GrElem = a.iter().map(|&c| c % self.p).collect();
        // in the residue field a^(q-2) is the inverse; computed here at full
        // precision it is still correct modulo p
        let mut y = self.pow(&residue, q - 2);
        let two = self.from_int(2);
        for _ in 0..=self.precision {
            let ay = self.mul(a, &y);
            y = self.mul(&y, &self.sub(&two, &ay));
        }
        debug_assert_eq!(self.mul(a, &y), self.one());
        Some(y)
    }

    /// j-th p-adic digit as a residue-field code `sum_l d_l p^l`.
    pub fn digit(&self, a: &[u64], j: u32) -> u32 {
        let pj = self.p.pow(j);
        let mut code = 0u64;
        for (l, &c) in a.iter().enumerate() {
            code += ((c / pj) % self.p) * self.p.pow(l as u32);
        }
        code as u32
    }

    /// Adds `[code] p^j` to `a` in place.
    pub fn add_digit(&self, a: &mut [u64], code: u32, j: u32) {
        let pj = self.p.pow(j);
        let mut c = code as u64;
        for coord in a.iter_mut() {
            *coord = (*coord + (c % self.p) * pj) % self.modulus;
            c /= self.p;
        }
    }

    pub fn from_digits(&self, digits: &[u32]) -> GrElem {
        let mut a = self.zero();
        for (j, &d) in digits.iter().enumerate() {
            if (j as u32) < self.precision {
                self.add_digit(&mut a, d, j as u32);
            }
        }
        a
    }

    /// Evaluates `sum_k coeffs[k] y^k`.
    pub fn eval(&self, coeffs: &[GrElem], y: &[u64]) -> GrElem {
        let mut acc = self.zero();
        for c in coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, y), c);
        }
        acc
    }

    /// Hensel lift of a simple root of `poly` (coefficients in Z, given mod p
    /// as small integers) starting from an approximation correct modulo p.
    pub fn hensel_root(&self, poly: &[u64], start: &[u64]) -> GrElem {
        let coeffs: Vec<GrElem> = poly.iter().map(|&c| self.from_int(c as i64)).collect();
        let deriv: Vec<GrElem> = poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| self.from_int((c * k as u64) as i64))
            .collect();
        let mut y = start.to_vec();
        for _ in 0..=self.precision {
            let val = self.eval(&coeffs, &y);
            if self.is_zero(&val) {
                break;
            }
            let dv = self.eval(&deriv, &y);
            let inv = self
                .inverse(&dv)
                .expect("root of a separable polynomial has unit derivative");
            y = self.sub(&y, &self.mul(&val, &inv));
        }
        debug_assert!(self.is_zero(&self.eval(&coeffs, &y)));
        y
    }

    fn compute_frobenius_image(&self, k: usize) -> GrElem {
        if self.degree == 1 {
            return self.generator();
        }
        let g = self.generator();
        let approx = self.pow(&g, self.p.pow(k as u32));
        self.hensel_root(&self.poly, &approx)
    }

    /// Image of g under the k-th power of the Frobenius lift σ (σ reduces to
    /// z -> z^p on the residue field).
    pub fn frobenius_image(&self, k: usize) -> &GrElem {
        &self.frob[k % self.degree]
    }

    /// Applies σ^k.
    pub fn frobenius(&self, a: &[u64], k: usize) -> GrElem {
        let k = k % self.degree;
        if k == 0 {
            return a.to_vec();
        }
        let coeffs: Vec<GrElem> = a.iter().map(|&c| self.from_int(c as i64)).collect();
        self.eval(&coeffs, &self.frob[k])
    }

    /// Image of the generator of GR(p^N, sub) inside this ring, for `sub`
    /// dividing the degree: the Hensel lift of the least residue root of the
    /// subring's defining polynomial.
    pub fn subring_generator(&self, sub: usize) -> GrElem {
        assert!(self.degree % sub == 0);
        if sub == self.degree {
            return self.generator();
        }
        let small = defining_polynomial(self.p, sub);
        if sub == 1 {
            return self.from_int(-(small[0] as i64));
        }
        let q = self.residue_size() as u32;
        let residue = GaloisRing::new(self.p, self.degree, 1);
        let coeffs: Vec<GrElem> = small.iter().map(|&c| residue.from_int(c as i64)).collect();
        let root = (0..q)
            .map(|code| residue.from_digits(&[code]))
            .find(|y| residue.is_zero(&residue.eval(&coeffs, y)))
            .expect("subfield polynomial splits in the extension");
        let start = self.from_digits(&[residue.digit(&root, 0)]);
        self.hensel_root(&small, &start)
    }
}
