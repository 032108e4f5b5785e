use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::csvio;
use crate::error::{Error, Result};
use crate::spatial::geometry::{angle_diff, CylinderGeometry, SurfacePoint};

/// One pose sample of one robot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryFrame {
    pub t: f64,
    pub robot_id: u32,
    pub pose: SurfacePoint,
    /// Dead-reckoned estimate, when recorded.
    pub estimate: Option<SurfacePoint>,
}

impl TrajectoryFrame {
    pub fn position(&self, geometry: &CylinderGeometry) -> [f64; 3] {
        geometry.to_cartesian(self.pose)
    }

    /// `‖estimate − true‖` in the tangent plane; zero without an estimate.
    pub fn error_magnitude(&self, geometry: &CylinderGeometry) -> f64 {
        self.estimate.map_or(0.0, |e| {
            let [a, b] = geometry.tangent_offset(self.pose, e);
            a.hypot(b)
        })
    }
}

fn input(row: usize, reason: impl Into<String>) -> Error {
    Error::Input {
        row,
        reason: reason.into(),
    }
}

/// Reads `t,robot_id,phi,z[,est_phi,est_z]`. Rows are numbered by file line.
pub fn read_trajectories<R: Read>(source: R) -> Result<Vec<TrajectoryFrame>> {
    let mut rdr = csvio::reader(source);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let required = ["t", "robot_id", "phi", "z"];
    let mut idx = [0usize; 4];
    for (slot, name) in idx.iter_mut().zip(required) {
        *slot = col(name).ok_or_else(|| input(1, format!("missing column `{name}`")))?;
    }
    let est = match (col("est_phi"), col("est_z")) {
        (Some(p), Some(z)) => Some((p, z)),
        (None, None) => None,
        _ => return Err(input(1, "`est_phi` and `est_z` must appear together")),
    };
    let mut last_t: BTreeMap<u32, f64> = BTreeMap::new();
    let mut frames = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize, name: &str| -> Result<f64> {
            let text = record.get(i).ok_or_else(|| input(row, format!("missing `{name}`")))?;
            let v: f64 = text
                .parse()
                .map_err(|_| input(row, format!("`{name}` is not a number: `{text}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(input(row, format!("`{name}` is not finite")))
            }
        };
        let id_text = record.get(idx[1]).unwrap_or_default();
        let robot_id: u32 = id_text
            .parse()
            .map_err(|_| input(row, format!("`robot_id` is not a non-negative integer: `{id_text}`")))?;
        let t = num(idx[0], "t")?;
        if let Some(&prev) = last_t.get(&robot_id) {
            if t <= prev {
                return Err(input(row, format!("time {t} does not increase for robot {robot_id}")));
            }
        }
        last_t.insert(robot_id, t);
        let estimate = match est {
            Some((p, z)) => Some(SurfacePoint::new(num(p, "est_phi")?, num(z, "est_z")?)),
            None => None,
        };
        frames.push(TrajectoryFrame {
            t,
            robot_id,
            pose: SurfacePoint::new(num(idx[2], "phi")?, num(idx[3], "z")?),
            estimate,
        });
    }
    Ok(frames)
}

pub fn write_trajectories<W: Write>(out: W, comments: &[String], frames: &[TrajectoryFrame]) -> Result<()> {
    let with_est = frames.iter().any(|f| f.estimate.is_some());
    let mut out = out;
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    if with_est {
        w.write_record(["t", "robot_id", "phi", "z", "est_phi", "est_z"])?;
    } else {
        w.write_record(["t", "robot_id", "phi", "z"])?;
    }
    for f in frames {
        let mut rec = vec![
            f.t.to_string(),
            f.robot_id.to_string(),
            f.pose.phi.to_string(),
            f.pose.z.to_string(),
        ];
        if with_est {
            let e = f.estimate.unwrap_or(f.pose);
            rec.push(e.phi.to_string());
            rec.push(e.z.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Trajectories of several robots on one time grid `t0 + k·dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySet {
    /// Robot ids, ascending. Simulation index `i` is `ids[i]`.
    pub ids: Vec<u32>,
    pub t0: f64,
    pub dt: f64,
    /// `poses[i][k]`.
    pub poses: Vec<Vec<SurfacePoint>>,
    /// Recorded dead-reckoning offsets `(arc, z)`, replacing the synthetic drift.
    pub drift: Option<Vec<Arc<[[f64; 2]]>>>,
}

impl TrajectorySet {
    pub fn n_robots(&self) -> usize {
        self.ids.len()
    }

    pub fn steps(&self) -> usize {
        self.poses.first().map_or(0, Vec::len)
    }

    pub fn time(&self, step: usize) -> f64 {
        self.t0 + step as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    /// Resamples onto a common `dt` grid over the interval every robot covers,
    /// interpolating linearly in unwrapped `φ` and in `z`.
    pub fn from_frames(frames: &[TrajectoryFrame], dt: f64, geometry: &CylinderGeometry) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::param("dt", "must be > 0"));
        }
        if frames.is_empty() {
            return Err(input(0, "no trajectory frames"));
        }
        let with_est = frames[0].estimate.is_some();
        let mut by_robot: BTreeMap<u32, Vec<(usize, &TrajectoryFrame)>> = BTreeMap::new();
        for (row, f) in frames.iter().enumerate() {
            if f.estimate.is_some() != with_est {
                return Err(input(row + 1, "estimate columns present for some frames only"));
            }
            by_robot.entry(f.robot_id).or_default().push((row + 1, f));
        }
        for series in by_robot.values() {
            for w in series.windows(2) {
                if w[1].1.t <= w[0].1.t {
                    return Err(input(
                        w[1].0,
                        format!("time does not increase for robot {}", w[1].1.robot_id),
                    ));
                }
            }
        }
        let t0 = by_robot.values().map(|s| s[0].1.t).fold(f64::NEG_INFINITY, f64::max);
        let t1 = by_robot
            .values()
            .map(|s| s[s.len() - 1].1.t)
            .fold(f64::INFINITY, f64::min);
        if t1 < t0 {
            return Err(input(
                0,
                format!("robot trajectories share no common time interval ({t0} > {t1})"),
            ));
        }
        let steps = ((t1 - t0) / dt + 1e-9).floor() as usize + 1;

        let mut poses = Vec::with_capacity(by_robot.len());
        let mut drift = with_est.then(Vec::new);
        for series in by_robot.values() {
            let times: Vec<f64> = series.iter().map(|(_, f)| f.t).collect();
            let mut phi = Vec::with_capacity(series.len());
            for (k, (_, f)) in series.iter().enumerate() {
                phi.push(if k == 0 {
                    f.pose.phi
                } else {
                    phi[k - 1] + angle_diff(f.pose.phi, series[k - 1].1.pose.phi)
                });
            }
            let z: Vec<f64> = series.iter().map(|(_, f)| f.pose.z).collect();
            let mut cursor = 0;
            let mut samples = Vec::with_capacity(steps);
            let mut offsets = Vec::with_capacity(if with_est { steps } else { 0 });
            for k in 0..steps {
                let t = (t0 + k as f64 * dt).min(t1);
                while cursor + 1 < times.len() && times[cursor + 1] < t {
                    cursor += 1;
                }
                let (i, j) = (cursor, (cursor + 1).min(times.len() - 1));
                let w = if j == i {
                    0.0
                } else {
                    ((t - times[i]) / (times[j] - times[i])).clamp(0.0, 1.0)
                };
                let lerp = |v: &[f64]| v[i] + w * (v[j] - v[i]);
                samples.push(SurfacePoint::new(lerp(&phi), lerp(&z)));
                if with_est {
                    let off = |idx: usize| {
                        let f = series[idx].1;
                        geometry.tangent_offset(f.pose, f.estimate.unwrap_or(f.pose))
                    };
                    let (a, b) = (off(i), off(j));
                    offsets.push([a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]);
                }
            }
            poses.push(samples);
            if let Some(d) = drift.as_mut() {
                d.push(Arc::from(offsets));
            }
        }
        Ok(Self {
            ids: by_robot.keys().copied().collect(),
            t0,
            dt,
            poses,
            drift,
        })
    }

    /// Frames on the grid, robot-major. Recorded offsets become estimates.
    pub fn to_frames(&self, geometry: &CylinderGeometry) -> Vec<TrajectoryFrame> {
        let mut out = Vec::with_capacity(self.n_robots() * self.steps());
        for (i, &robot_id) in self.ids.iter().enumerate() {
            for (k, &pose) in self.poses[i].iter().enumerate() {
                let estimate = self.drift.as_ref().map(|d| {
                    let [a, z] = d[i][k];
                    SurfacePoint::new(pose.phi + a / geometry.radius, pose.z + z)
                });
                out.push(TrajectoryFrame {
                    t: self.time(k),
                    robot_id,
                    pose,
                    estimate,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn frame(t: f64, id: u32, phi: f64, z: f64) -> TrajectoryFrame {
        TrajectoryFrame {
            t,
            robot_id: id,
            pose: SurfacePoint::new(phi, z),
            estimate: None,
        }
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let text = "# comment\nt,robot_id,phi,z\n0,1,0.5,0.2\n0.1,1,0.6,0.25\n0,0,1,0.1\n";
        let frames = read_trajectories(text.as_bytes()).unwrap();
        assert_eq!(frames.len(), 3);
        let mut buf = Vec::new();
        write_trajectories(&mut buf, &[], &frames).unwrap();
        assert_eq!(read_trajectories(buf.as_slice()).unwrap(), frames);

        let bad = "t,robot_id,phi,z\n0,1,0.5,0.2\n0,1,0.6,0.25\n";
        assert!(matches!(
            read_trajectories(bad.as_bytes()),
            Err(Error::Input { row: 3, .. })
        ));
        let bad = "t,robot_id,phi,z\n0,1,x,0.2\n";
        assert!(matches!(
            read_trajectories(bad.as_bytes()),
            Err(Error::Input { row: 2, .. })
        ));
        assert!(matches!(
            read_trajectories("t,phi,z\n".as_bytes()),
            Err(Error::Input { .. })
        ));
    }

    #[test]
    fn resampling_interpolates_across_the_seam() {
        let g = CylinderGeometry::default();
        let frames = vec![
            frame(0.0, 0, TAU - 0.1, 0.0),
            frame(1.0, 0, 0.1, 1.0),
            frame(0.0, 3, 1.0, 0.5),
            frame(2.0, 3, 1.0, 0.5),
        ];
        let set = TrajectorySet::from_frames(&frames, 0.25, &g).unwrap();
        assert_eq!(set.ids, vec![0, 3]);
        assert_eq!(set.steps(), 5);
        let mid = set.poses[0][2];
        assert!(mid.phi.abs() < 1e-12 || (mid.phi - TAU).abs() < 1e-12);
        assert!((mid.z - 0.5).abs() < 1e-12);
    }

    #[test]
    fn disjoint_time_ranges_are_rejected() {
        let frames = vec![
            frame(0.0, 0, 0.0, 0.0),
            frame(1.0, 0, 0.0, 0.0),
            frame(2.0, 1, 0.0, 0.0),
            frame(3.0, 1, 0.0, 0.0),
        ];
        assert!(matches!(
            TrajectorySet::from_frames(&frames, 0.1, &CylinderGeometry::default()),
            Err(Error::Input { .. })
        ));
    }

    #[test]
    fn recorded_offsets_survive_resampling() {
        let g = CylinderGeometry::default();
        let mk = |t: f64, off: f64| TrajectoryFrame {
            t,
            robot_id: 0,
            pose: SurfacePoint::new(1.0, 0.5),
            estimate: Some(SurfacePoint::new(1.0 + off / g.radius, 0.5)),
        };
        let set = TrajectorySet::from_frames(&[mk(0.0, 0.0), mk(1.0, 0.2)], 0.5, &g).unwrap();
        let d = &set.drift.as_ref().unwrap()[0];
        assert!((d[1][0] - 0.1).abs() < 1e-12);
        let back = set.to_frames(&g);
        assert!((back[2].error_magnitude(&g) - 0.2).abs() < 1e-12);
    }
}
