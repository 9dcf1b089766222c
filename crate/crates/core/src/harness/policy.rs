use crate::drl::{Agent, Checkpoint};
use crate::dwa::{project_to_feasible, select_from_window};
use crate::env::NavEnv;
use crate::error::Result;
use crate::geom::wrap_angle;
use crate::world::Command;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;

/// Something that turns the environment's current state into a command.
#[derive(Debug, Clone)]
pub enum Policy {
    /// Classic DWA; stops as hard as the window allows when nothing is admissible.
    Dwa,
    /// Uniform raw action projected onto the window.
    Random,
    StandStill,
    /// Turn toward the goal and drive, clipped to the window ranges.
    StraightToGoal,
    /// Noise-free trained actor, projected onto the window.
    Agent(Arc<Agent>),
}

impl Policy {
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        Ok(Policy::Agent(Arc::new(ckpt.to_agent()?)))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Dwa => "dwa",
            Policy::Random => "random",
            Policy::StandStill => "stand-still",
            Policy::StraightToGoal => "straight",
            Policy::Agent(_) => "agent",
        }
    }

    pub fn command(&self, env: &NavEnv, rng: &mut ChaCha8Rng) -> Result<Command> {
        let window = env.window();
        Ok(match self {
            Policy::Dwa => select_from_window(window).unwrap_or_else(|_| window.braking_candidate().command()),
            Policy::Random => {
                let raw = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
                project_to_feasible(raw, window)
            }
            Policy::StandStill => Command::STOP,
            Policy::StraightToGoal => {
                let r = env.robot();
                let goal = env.world().goal;
                let err = wrap_angle((goal.y - r.y).atan2(goal.x - r.x) - r.heading);
                let lim = &env.config.dwa.limits;
                let omega = (2.0 * err).clamp(window.omega_range.0, window.omega_range.1);
                let v = (lim.v_max * err.cos().max(0.0)).clamp(window.v_range.0, window.v_range.1);
                Command::new(v, omega)
            }
            Policy::Agent(agent) => {
                let obs = env.observe();
                let a = agent.act(obs.as_slice(), 0.0, rng)?;
                project_to_feasible([a[0], a[1]], window)
            }
        })
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
