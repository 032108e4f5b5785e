use std::f64::consts::PI;

use swarm_sacrifice::spatial::{
    read_trajectories, run_spatial, synth_random_walk, write_trajectories, CylinderGeometry, SpatialConfig,
    SurfacePoint, TrajectorySet, WalkParams,
};
use swarm_sacrifice::wellmixed::{run, LossModel, Recording, RunConfig};
use swarm_sacrifice::{AgentMode, SwarmParams};

fn parked(spots: &[(f64, f64)], steps: usize) -> TrajectorySet {
    TrajectorySet {
        ids: (0..spots.len() as u32).collect(),
        t0: 0.0,
        dt: 0.05,
        poses: spots
            .iter()
            .map(|&(phi, z)| vec![SurfacePoint::new(phi, z); steps])
            .collect(),
        drift: None,
    }
}

#[test]
fn a_robot_nobody_sees_behaves_like_a_lone_agent() {
    let set = parked(&[(PI, 0.5), (0.0, 0.4), (0.0, 0.6)], 6000);
    let cfg = SpatialConfig {
        seed: 2,
        ..SpatialConfig::default()
    };
    let spatial = run_spatial(&set, &cfg).unwrap();
    assert_eq!(spatial.network.degree(0), 0);
    assert_eq!(spatial.network.degree(1), 1);

    let p = SwarmParams::fixed(1, 0, 0.0, 0.0)
        .with_tau_p(cfg.tau_p)
        .with_dt(set.dt)
        .with_horizon(6000.0 * set.dt)
        .with_mode_switch(cfg.mode_switch);
    let lone = RunConfig::new(p, vec![AgentMode::DrNotLost], cfg.seed)
        .with_loss(LossModel::Drift { sigma: cfg.sigma })
        .with_collaboration(cfg.collaboration)
        .with_recording(Recording {
            modes: true,
            ..Recording::default()
        });
    let reference: Vec<AgentMode> = run(&lone).unwrap().mode_series.iter().map(|m| m[0]).collect();
    assert_eq!(spatial.modes_of(0), reference);
}

#[test]
fn written_trajectories_read_back_to_the_same_grid() {
    let g = CylinderGeometry::default();
    let mut frames = Vec::new();
    for id in 0..3 {
        frames.extend(synth_random_walk(&g, 10.0, &WalkParams::default(), id, 8).unwrap());
    }
    let mut buf = Vec::new();
    write_trajectories(&mut buf, &["test".into()], &frames).unwrap();
    let back = read_trajectories(buf.as_slice()).unwrap();
    let a = TrajectorySet::from_frames(&frames, 0.05, &g).unwrap();
    let b = TrajectorySet::from_frames(&back, 0.05, &g).unwrap();
    assert_eq!(a.steps(), b.steps());
    for (pa, pb) in a.poses.iter().flatten().zip(b.poses.iter().flatten()) {
        assert!((pa.phi - pb.phi).abs() < 1e-12 && (pa.z - pb.z).abs() < 1e-12);
    }
}
