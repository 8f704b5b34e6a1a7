//! Shared per-class lookup tables for the scan-heavy paths.
//!
//! Scans touch the same small-weight data millions of times: `d^ur`/`d^Iw`
//! for every window weight, and `v_p` of every small difference. Building
//! them once per class turns each coefficient valuation into a run of
//! table lookups.

use crate::dims::{d_iw_small, d_ur_small};
use crate::params::WeightClass;
use crate::valuation::vp_u64;

pub(crate) struct ClassTables {
    pub max_k_bullet: u64,
    d_ur: Vec<u32>,
    /// v_p of every positive integer up to `max_k_bullet`; index 0 unused.
    vp: Vec<u8>,
    p: u64,
    delta: u64,
}

impl ClassTables {
    pub fn build(class: &WeightClass, max_k_bullet: u64) -> Self {
        let n = usize::try_from(max_k_bullet + 1).expect("table window exceeds memory");
        let mut d_ur = Vec::with_capacity(n);
        for kb in 0..=max_k_bullet {
            let d = d_ur_small(class.p(), class.t1(), class.t2(), kb);
            d_ur.push(u32::try_from(d).expect("d_ur exceeds u32 in table window"));
        }
        let mut vp = vec![0u8; n];
        let p = class.p();
        let mut q = p;
        while q <= max_k_bullet {
            let mut m = q;
            while m <= max_k_bullet {
                vp[m as usize] += 1;
                m += q;
            }
            match q.checked_mul(p) {
                Some(next) if next <= max_k_bullet => q = next,
                _ => break,
            }
        }
        ClassTables {
            max_k_bullet,
            d_ur,
            vp,
            p,
            delta: class.delta(),
        }
    }

    #[inline]
    pub fn d_ur(&self, k_bullet: u64) -> u64 {
        self.d_ur[k_bullet as usize] as u64
    }

    #[inline]
    pub fn d_iw(&self, k_bullet: u64) -> u64 {
        d_iw_small(self.delta, k_bullet)
    }

    /// `m_n(k)` for a window weight.
    #[inline]
    pub fn multiplicity(&self, n: u64, k_bullet: u64) -> u64 {
        let d_ur = self.d_ur(k_bullet);
        if n <= d_ur {
            return 0;
        }
        let upper = self.d_iw(k_bullet) - d_ur;
        if n >= upper {
            return 0;
        }
        (n - d_ur).min(upper - n)
    }

    /// `v_p` of a difference of two window weights.
    #[inline]
    pub fn vp_diff(&self, x: u64, y: u64) -> u64 {
        let d = x.abs_diff(y);
        if d <= self.max_k_bullet {
            self.vp[d as usize] as u64
        } else {
            vp_u64(self.p, d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dims::Weight;
    use crate::params::validate;

    #[test]
    fn tables_match_direct_computation() {
        let class = WeightClass::new(validate(11, 2, 9, true).unwrap());
        let t = ClassTables::build(&class, 500);
        for kb in 0..=500u64 {
            let w = Weight::from_u64(kb);
            assert_eq!(
                t.d_ur(kb),
                num_traits::ToPrimitive::to_u64(&class.d_ur(&w)).unwrap()
            );
            for n in [0u64, 1, 2, 3, 7, 20] {
                assert_eq!(t.multiplicity(n, kb), class.multiplicity(n, &w));
            }
            if kb > 0 {
                assert_eq!(t.vp_diff(kb, 0), vp_u64(11, kb));
            }
        }
    }
}
