//! Inputs for the benchmarks.

use perdec_core::PeriodicSystem;

/// The same system viewed with period `k * T`; the cyclic matrices grow by
/// a factor `k` per side while the dynamics stay unchanged.
pub fn repeat_period(sys: &PeriodicSystem, k: usize) -> PeriodicSystem {
    let t = sys.period() * k;
    let at = |f: &dyn Fn(i64) -> perdec_core::QMat| (0..t as i64).map(f).collect::<Vec<_>>();
    PeriodicSystem::new(
        (0..t as i64).map(|s| sys.n(s)).collect(),
        sys.inputs(),
        sys.outputs(),
        at(&|s| sys.a(s).clone()),
        at(&|s| sys.b(s).clone()),
        at(&|s| sys.c(s).clone()),
        at(&|s| sys.d(s).clone()),
    )
    .expect("repeating a valid system keeps its shapes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use perdec_core::fixtures::example2;

    #[test]
    fn repeated_system_keeps_its_response() {
        let sys = example2();
        let long = repeat_period(&sys, 2);
        assert_eq!(long.period(), 4);
        assert_eq!(long.verify_decoupled(None).stable, sys.is_stable());
        let u = vec![vec![perdec_core::Q::from_integer(1.into()); 3]; 5];
        let x0 = vec![perdec_core::Q::from_integer(0.into()); 3];
        assert_eq!(sys.simulate(&x0, &u, 0, 5).unwrap(), long.simulate(&x0, &u, 0, 5).unwrap());
    }
}
