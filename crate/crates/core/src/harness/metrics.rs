use crate::scalar::Scalar;
use crate::trajectory::Trajectory;

/// Makespan and flowtime: the latest arrival and the sum of arrivals.
pub fn metrics<S: Scalar>(trajs: &[Trajectory<S>]) -> (S, S) {
    trajs.iter().fold((S::zero(), S::zero()), |(msp, flt), t| {
        let a = t.arrival();
        (msp.max(a), flt + a)
    })
}
