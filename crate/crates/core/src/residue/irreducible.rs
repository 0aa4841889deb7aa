//! Defining polynomials for the residue fields F_{p^n}.
//!
//! Small `(p, n)` use the Conway polynomial; anything else falls back to the
//! least monic irreducible polynomial in lexicographic coefficient order
//! (constant term least significant). Both choices are deterministic.

/// Conway polynomials, coefficients from the constant term up, monic.
const CONWAY: &[(u64, &[u64])] = &[
    (2, &[1, 1]),
    (2, &[1, 1, 1]),
    (2, &[1, 1, 0, 1]),
    (2, &[1, 1, 0, 0, 1]),
    (2, &[1, 0, 1, 0, 0, 1]),
    (2, &[1, 1, 0, 1, 1, 0, 1]),
    (2, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
    (3, &[1, 1]),
    (3, &[2, 2, 1]),
    (3, &[1, 2, 0, 1]),
    (3, &[2, 0, 0, 2, 1]),
    (3, &[1, 2, 0, 0, 0, 1]),
    (3, &[2, 2, 1, 0, 2, 0, 1]),
    (5, &[3, 1]),
    (5, &[2, 4, 1]),
    (5, &[3, 3, 0, 1]),
    (5, &[2, 4, 4, 0, 1]),
    (7, &[4, 1]),
    (7, &[3, 6, 1]),
    (7, &[4, 0, 6, 1]),
    (11, &[9, 1]),
    (11, &[2, 7, 1]),
    (13, &[11, 1]),
    (13, &[2, 12, 1]),
];

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Defining polynomial of F_{p^n} used throughout the crate.
pub fn defining_polynomial(p: u64, n: usize) -> Vec<u64> {
    if let Some((_, c)) = CONWAY
        .iter()
        .find(|(q, c)| *q == p && c.len() == n + 1)
    {
        return c.to_vec();
    }
    least_irreducible(p, n)
}

pub fn least_irreducible(p: u64, n: usize) -> Vec<u64> {
    let total = p.pow(n as u32);
    for code in 0..total {
        let mut poly = Vec::with_capacity(n + 1);
        let mut c = code;
        for _ in 0..n {
            poly.push(c % p);
            c /= p;
        }
        poly.push(1);
        if is_irreducible(p, &poly) {
            return poly;
        }
    }
    unreachable!("irreducible polynomials of every degree exist over F_p")
}

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
    a
}

/// Remainder of `a` modulo the monic polynomial `m` over F_p.
pub fn poly_rem(p: u64, a: &[u64], m: &[u64]) -> Vec<u64> {
    let mut r: Vec<u64> = a.iter().map(|x| x % p).collect();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let off = r.len() - dm;
            for (k, &mk) in m[..dm].iter().enumerate() {
                r[off + k] = (r[off + k] + (p - lead) * mk % p) % p;
            }
        }
    }
    trim(r)
}

/// Trial division by every monic polynomial of degree at most n/2.
pub fn is_irreducible(p: u64, poly: &[u64]) -> bool {
    let n = poly.len() - 1;
    if n == 0 || poly[n] % p == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    for deg in 1..=n / 2 {
        for code in 0..p.pow(deg as u32) {
            let mut div = Vec::with_capacity(deg + 1);
            let mut c = code;
            for _ in 0..deg {
                div.push(c % p);
                c /= p;
            }
            div.push(1);
            let r = poly_rem(p, poly, &div);
            if r.iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conway_table_entries_are_irreducible() {
        for (p, c) in CONWAY {
            assert!(is_irreducible(*p, c), "p={p} poly={c:?}");
        }
    }

    #[test]
    fn fallback_is_least_irreducible() {
        // x^2 + 1 is the least irreducible quadratic over F_3 in this order.
        assert_eq!(least_irreducible(3, 2), vec![1, 0, 1]);
        // x^2 + x + 1 over F_2.
        assert_eq!(least_irreducible(2, 2), vec![1, 1, 1]);
        let p17 = defining_polynomial(17, 2);
        assert!(is_irreducible(17, &p17));
    }

    #[test]
    fn primes() {
        let ps: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }
}
