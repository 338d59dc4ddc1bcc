use serde::{Deserialize, Serialize};

use super::net::{DenseNet, ParamGrads};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates for every parameter of one network.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step_count: u64,
    first_moment: ParamGrads,
    second_moment: ParamGrads,
}

impl AdamState {
    pub fn new(net: &DenseNet, config: AdamConfig) -> Result<Self> {
        let valid = config.learning_rate > 0.0
            && (0.0..1.0).contains(&config.beta1)
            && config.beta1 > 0.0
            && (0.0..1.0).contains(&config.beta2)
            && config.beta2 > 0.0
            && config.epsilon > 0.0;
        if !valid {
            return Err(Error::Config(format!("invalid Adam settings {config:?}")));
        }
        Ok(Self {
            config,
            step_count: 0,
            first_moment: ParamGrads::zeros_like(net),
            second_moment: ParamGrads::zeros_like(net),
        })
    }

    pub fn first_moment(&self) -> &ParamGrads {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &ParamGrads {
        &self.second_moment
    }
}

/// One bias-corrected Adam step applied in place.
///
/// Gradients are checked before any parameter is touched, so a rejected
/// update leaves both the network and the state unchanged.
pub fn adam_update(net: &mut DenseNet, grads: &ParamGrads, state: &mut AdamState) -> Result<()> {
    check_shapes(net, grads, state)?;
    for (k, g) in grads.weight.iter().enumerate() {
        if let Some(i) = g.iter().position(|x| !x.is_finite()) {
            return Err(Error::Training(format!(
                "non-finite gradient at layers[{k}].weight[{i}]"
            )));
        }
    }
    for (k, g) in grads.bias.iter().enumerate() {
        if let Some(i) = g.iter().flatten().position(|x| !x.is_finite()) {
            return Err(Error::Training(format!(
                "non-finite gradient at layers[{k}].bias[{i}]"
            )));
        }
    }

    state.step_count += 1;
    let AdamConfig {
        learning_rate: lr,
        beta1: b1,
        beta2: b2,
        epsilon: eps,
    } = state.config;
    let t = state.step_count as i32;
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);

    let step = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    };

    for (k, layer) in net.params_mut().enumerate() {
        step(
            &mut layer.weight,
            &grads.weight[k],
            &mut state.first_moment.weight[k],
            &mut state.second_moment.weight[k],
        );
        if let (Some(b), Some(g)) = (layer.bias.as_mut(), grads.bias[k].as_ref()) {
            step(
                b,
                g,
                state.first_moment.bias[k].as_mut().expect("moment shape checked"),
                state.second_moment.bias[k].as_mut().expect("moment shape checked"),
            );
        }
    }
    if !net.is_finite() {
        return Err(Error::Training("parameters became non-finite".into()));
    }
    Ok(())
}

fn check_shapes(net: &DenseNet, grads: &ParamGrads, state: &AdamState) -> Result<()> {
    let layers = net.layers();
    if grads.weight.len() != layers.len() || state.first_moment.weight.len() != layers.len() {
        return Err(Error::contract("gradient/moment layer count does not match network"));
    }
    for (k, l) in layers.iter().enumerate() {
        let n = l.weight.len();
        for (what, len) in [
            ("gradient", grads.weight[k].len()),
            ("first moment", state.first_moment.weight[k].len()),
            ("second moment", state.second_moment.weight[k].len()),
        ] {
            if len != n {
                return Err(Error::shape(format!("layers[{k}].weight {what}"), n, len));
            }
        }
        let want = l.bias.as_ref().map(Vec::len);
        if grads.bias[k].as_ref().map(Vec::len) != want
            || state.first_moment.bias[k].as_ref().map(Vec::len) != want
        {
            return Err(Error::contract(format!("layers[{k}].bias shape mismatch")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::net::{Activation, LayerSpec};

    fn scalar_net(w: f64) -> DenseNet {
        DenseNet::new(vec![LayerSpec {
            in_dim: 1,
            out_dim: 1,
            weight: vec![w],
            bias: None,
            activation: Activation::Identity,
        }])
        .unwrap()
    }

    fn grad(g: f64) -> ParamGrads {
        ParamGrads {
            weight: vec![vec![g]],
            bias: vec![None],
        }
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut net = scalar_net(0.0);
        let cfg = AdamConfig {
            learning_rate: 0.1,
            ..AdamConfig::default()
        };
        let mut st = AdamState::new(&net, cfg).unwrap();
        adam_update(&mut net, &grad(1.0), &mut st).unwrap();
        // m_hat = 1, v_hat = 1, step = 0.1 / (1 + 1e-8)
        let expected = -0.1 / (1.0 + 1e-8);
        assert!((net.layers()[0].weight[0] - expected).abs() < 1e-15);
        assert_eq!(st.step_count, 1);
    }

    #[test]
    fn zero_gradients_leave_fresh_params_unchanged() {
        let mut net = scalar_net(0.7);
        let mut st = AdamState::new(&net, AdamConfig::default()).unwrap();
        for _ in 0..3 {
            adam_update(&mut net, &grad(0.0), &mut st).unwrap();
        }
        assert_eq!(net.layers()[0].weight[0], 0.7);
        assert_eq!(st.step_count, 3);
        assert_eq!(st.first_moment().weight[0][0], 0.0);
    }

    #[test]
    fn moments_decay_under_zero_gradient() {
        let mut net = scalar_net(0.0);
        let mut st = AdamState::new(&net, AdamConfig::default()).unwrap();
        adam_update(&mut net, &grad(1.0), &mut st).unwrap();
        let m1 = st.first_moment().weight[0][0];
        let v1 = st.second_moment().weight[0][0];
        adam_update(&mut net, &grad(0.0), &mut st).unwrap();
        assert!(st.first_moment().weight[0][0].abs() < m1.abs());
        assert!(st.second_moment().weight[0][0] < v1);
    }

    #[test]
    fn repeated_steps_move_against_gradient() {
        let mut net = scalar_net(1.0);
        let mut st = AdamState::new(&net, AdamConfig::default()).unwrap();
        let mut prev = 1.0;
        for _ in 0..2 {
            adam_update(&mut net, &grad(2.5), &mut st).unwrap();
            let cur = net.layers()[0].weight[0];
            assert!(cur < prev);
            prev = cur;
        }
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut net = scalar_net(1.0);
        let mut st = AdamState::new(&net, AdamConfig::default()).unwrap();
        let err = adam_update(&mut net, &grad(f64::NAN), &mut st).unwrap_err();
        assert!(err.to_string().contains("layers[0].weight[0]"), "{err}");
        assert_eq!(st.step_count, 0);
        assert_eq!(net.layers()[0].weight[0], 1.0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut net = scalar_net(1.0);
        let mut st = AdamState::new(&net, AdamConfig::default()).unwrap();
        let bad = ParamGrads {
            weight: vec![vec![1.0, 2.0]],
            bias: vec![None],
        };
        assert!(adam_update(&mut net, &bad, &mut st).is_err());
    }
}
