//! Rician user→UAV links, line-of-sight UAV→UAV links, and Shannon rates.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{ChannelParams, InterferenceMode, ScenarioConfig};
use crate::error::DomainError;
use crate::world::{Vec3, WorldState};

/// Draws the power gain |h|² of a Rician-faded user→UAV link at distance `d`.
///
/// h = sqrt(ϖ/d^γ)·(sqrt(φ/(φ+1))·h_L + sqrt(1/(φ+1))·h_N), with h_L a
/// unit-modulus line-of-sight term of uniform phase and h_N circularly
/// symmetric complex Gaussian with unit power.
pub fn sample_user_uav_gain<R: Rng + ?Sized>(
    distance: f64,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<f64, DomainError> {
    if !(distance > 0.0) {
        return Err(DomainError::NonPositiveDistance(distance));
    }
    let path = params.reference_gain / distance.powf(params.path_loss_exponent);
    let phi = params.rician_factor;
    let los = (phi / (phi + 1.0)).sqrt();
    let nlos = (1.0 / (phi + 1.0)).sqrt();
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let re_n: f64 = StandardNormal.sample(rng);
    let im_n: f64 = StandardNormal.sample(rng);
    let re = los * phase.cos() + nlos * re_n * std::f64::consts::FRAC_1_SQRT_2;
    let im = los * phase.sin() + nlos * im_n * std::f64::consts::FRAC_1_SQRT_2;
    Ok(path * (re * re + im * im))
}

fn shannon(bandwidth: f64, gain: f64, power: f64, interference: f64, noise: f64) -> f64 {
    let snr = (gain * power / (interference.max(0.0) + noise)).max(0.0);
    bandwidth * snr.ln_1p() / std::f64::consts::LN_2
}

/// B0·log2(1 + g·p / (I + σ0²)).
pub fn user_uav_rate(gain: f64, tx_power: f64, interference: f64, params: &ChannelParams) -> f64 {
    shannon(params.user_bandwidth, gain, tx_power, interference, params.user_noise_power)
}

/// β0/‖q_m − q_n‖², with separations under 1 m clamped to the 1 m reference.
pub fn uav_uav_gain(qm: &Vec3, qn: &Vec3, params: &ChannelParams) -> Result<f64, DomainError> {
    let d = (qm - qn).norm();
    if d == 0.0 {
        return Err(DomainError::CoincidentPositions);
    }
    Ok(params.uav_reference_gain / d.max(1.0).powi(2))
}

/// B1·log2(1 + H·P / (I + σ1²)).
pub fn uav_uav_rate(gain: f64, tx_power: f64, interference: f64, params: &ChannelParams) -> f64 {
    shannon(params.uav_bandwidth, gain, tx_power, interference, params.uav_noise_power)
}

/// Rate a link would reach at 1 m without fading; used to normalise rates.
pub fn reference_user_rate(cfg: &ScenarioConfig) -> f64 {
    user_uav_rate(cfg.channel.reference_gain, cfg.resources.user_tx_power, 0.0, &cfg.channel)
}

pub fn reference_relay_rate(cfg: &ScenarioConfig) -> f64 {
    uav_uav_rate(cfg.channel.uav_reference_gain, cfg.resources.uav_tx_power, 0.0, &cfg.channel)
}

/// Samples fresh fading for every user→UAV pair and recomputes all rates from
/// the current geometry.
///
/// In aggregate mode every user transmits concurrently, so the interference
/// at UAV m for user k is Σ_{j≠k} g_jm·p_j; likewise every UAV relays
/// concurrently and the interference on link m→n is Σ_{l≠m,n} H_ln·P_l.
pub fn sample_link_rates<R: Rng + ?Sized>(world: &mut WorldState, cfg: &ScenarioConfig, rng: &mut R) {
    let (k_count, m_count) = (world.user_count(), world.uav_count());
    let params = &cfg.channel;
    let p_user = cfg.resources.user_tx_power;
    let p_uav = cfg.resources.uav_tx_power;

    let mut gains = vec![0.0; k_count * m_count];
    for k in 0..k_count {
        for m in 0..m_count {
            let d = (world.users[k].position - world.uavs[m].position).norm().max(1.0);
            gains[k * m_count + m] = sample_user_uav_gain(d, params, rng).expect("distance clamped to 1 m");
        }
    }
    for k in 0..k_count {
        for m in 0..m_count {
            let interference = match params.interference_mode {
                InterferenceMode::Orthogonal => 0.0,
                InterferenceMode::Aggregate => (0..k_count)
                    .filter(|&j| j != k)
                    .map(|j| gains[j * m_count + m] * p_user)
                    .sum(),
            };
            world.user_uav_rate[k * m_count + m] = user_uav_rate(gains[k * m_count + m], p_user, interference, params);
        }
    }

    let positions = world.uav_positions();
    // Coincident UAVs are treated as sitting at the 1 m reference distance.
    let gain = |a: usize, b: usize| uav_uav_gain(&positions[a], &positions[b], params).unwrap_or(params.uav_reference_gain);
    for m in 0..m_count {
        for n in 0..m_count {
            world.uav_uav_rate[m * m_count + n] = if m == n {
                0.0
            } else {
                let interference = match params.interference_mode {
                    InterferenceMode::Orthogonal => 0.0,
                    InterferenceMode::Aggregate => (0..m_count)
                        .filter(|&l| l != m && l != n)
                        .map(|l| gain(l, n) * p_uav)
                        .sum(),
                };
                uav_uav_rate(gain(m, n), p_uav, interference, params)
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> ChannelParams {
        ChannelParams::default()
    }

    #[test]
    fn pure_los_limit_is_deterministic_path_loss() {
        let p = ChannelParams {
            rician_factor: 1e9,
            ..params()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d: f64 = 150.0;
        let expected = p.reference_gain / d.powf(p.path_loss_exponent);
        for _ in 0..100 {
            let g = sample_user_uav_gain(d, &p, &mut rng).unwrap();
            assert_relative_eq!(g, expected, max_relative = 1e-3);
        }
    }

    /// Monte-Carlo oracle: both fading components carry unit power, so the
    /// mean gain equals the path loss.
    #[test]
    fn mean_gain_matches_path_loss() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d: f64 = 200.0;
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| sample_user_uav_gain(d, &p, &mut rng).unwrap()).sum::<f64>() / n as f64;
        let expected = p.reference_gain / d.powf(p.path_loss_exponent);
        assert!((mean / expected - 1.0).abs() < 0.02, "mean {mean}, expected {expected}");
    }

    #[test]
    fn doubling_distance_quarters_gain_with_square_law() {
        let p = ChannelParams {
            path_loss_exponent: 2.0,
            ..params()
        };
        let mean = |d: f64, seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50_000).map(|_| sample_user_uav_gain(d, &p, &mut rng).unwrap()).sum::<f64>() / 50_000.0
        };
        // Same seed, so the fading draws coincide and the ratio is exact.
        assert_relative_eq!(mean(100.0, 9) / mean(200.0, 9), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn non_positive_distance_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_user_uav_gain(0.0, &params(), &mut rng).is_err());
        assert!(sample_user_uav_gain(-3.0, &params(), &mut rng).is_err());
    }

    #[test]
    fn user_rate_examples() {
        let p = params();
        let noise = p.user_noise_power;
        assert_relative_eq!(user_uav_rate(noise / 0.5, 0.5, 0.0, &p), 10.0e6, max_relative = 1e-12);
        assert_eq!(user_uav_rate(0.0, 0.5, 0.0, &p), 0.0);
        assert_relative_eq!(user_uav_rate(3.0 * noise, 1.0, 0.0, &p), 20.0e6, max_relative = 1e-12);
    }

    #[test]
    fn uav_gain_examples() {
        let p = params();
        let o = Vec3::new(0.0, 0.0, 100.0);
        assert_relative_eq!(uav_uav_gain(&o, &Vec3::new(100.0, 0.0, 100.0), &p).unwrap(), 1e-9, max_relative = 1e-12);
        assert_relative_eq!(uav_uav_gain(&o, &Vec3::new(1.0, 0.0, 100.0), &p).unwrap(), 1e-5);
        let far = uav_uav_gain(&o, &Vec3::new(40.0, 0.0, 100.0), &p).unwrap();
        let near = uav_uav_gain(&o, &Vec3::new(20.0, 0.0, 100.0), &p).unwrap();
        assert_relative_eq!(near / far, 4.0, max_relative = 1e-12);
        assert_eq!(uav_uav_gain(&o, &o, &p), Err(DomainError::CoincidentPositions));
        assert_relative_eq!(uav_uav_gain(&o, &Vec3::new(0.5, 0.0, 100.0), &p).unwrap(), 1e-5);
    }

    #[test]
    fn uav_rate_examples() {
        let p = params();
        assert_relative_eq!(uav_uav_rate(p.uav_noise_power, 1.0, 0.0, &p), 10.0e6, max_relative = 1e-12);
        assert_eq!(uav_uav_rate(1e-9, 0.0, 0.0, &p), 0.0);
    }

    #[test]
    fn rates_monotone_finite_and_nonnegative() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let g1: f64 = rng.random_range(0.0..1e-6);
            let g2 = g1 + rng.random_range(0.0..1e-6);
            let i: f64 = rng.random_range(0.0..1e-9);
            for f in [user_uav_rate, uav_uav_rate] {
                let (r1, r2) = (f(g1, 0.7, i, &p), f(g2, 0.7, i, &p));
                assert!(r1.is_finite() && r1 >= 0.0);
                assert!(r2 >= r1);
            }
        }
    }

    #[test]
    fn aggregate_interference_lowers_rates() {
        let cfg = ScenarioConfig {
            seed: 4,
            ..ScenarioConfig::desk()
        };
        let mut ortho = crate::world::build_scenario(&cfg).unwrap();
        let mut agg = ortho.clone();
        let mut agg_cfg = cfg.clone();
        agg_cfg.channel.interference_mode = InterferenceMode::Aggregate;
        sample_link_rates(&mut ortho, &cfg, &mut ChaCha8Rng::seed_from_u64(8));
        sample_link_rates(&mut agg, &agg_cfg, &mut ChaCha8Rng::seed_from_u64(8));
        for (o, a) in ortho.user_uav_rate.iter().zip(&agg.user_uav_rate) {
            assert!(a.is_finite() && *a >= 0.0 && a < o);
        }
        // With two UAVs there is no third-party relay interferer.
        assert_eq!(ortho.uav_uav_rate, agg.uav_uav_rate);
    }
}
