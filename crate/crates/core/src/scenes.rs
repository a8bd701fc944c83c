//! Scenes and the camera orbit shipped with the crate.

use crate::math::{orbit_ring, CameraPose};

pub const MESH_ONLY: &str = include_str!("../scenes/mesh_only.scene");
pub const VOLUME_ONLY: &str = include_str!("../scenes/volume_only.scene");
pub const HYBRID_DEMO: &str = include_str!("../scenes/hybrid_demo.scene");
/// Homogeneous slab used for transmittance checks.
pub const SLAB: &str = include_str!("../scenes/slab.scene");
/// 20 poses on a ring of radius 2.5 at 20 degrees elevation, 256x256.
pub const ORBIT_PATH: &str = include_str!("../scenes/orbit.cam");

/// `(name, text)` for every bundled scene.
pub const ALL: [(&str, &str); 4] = [
    ("mesh_only", MESH_ONLY),
    ("volume_only", VOLUME_ONLY),
    ("hybrid_demo", HYBRID_DEMO),
    ("slab", SLAB),
];

pub fn by_name(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// The ring behind [`ORBIT_PATH`].
pub fn orbit_cameras() -> Vec<CameraPose> {
    orbit_ring(20, 2.5, 20.0, 50.0, 256, 256)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_scene;
    use crate::math::{format_camera_path, parse_camera_path};

    #[test]
    fn bundled_scenes_parse() {
        for (name, text) in ALL {
            parse_scene(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn hybrid_demo_counts() {
        let s = parse_scene(HYBRID_DEMO).unwrap();
        assert_eq!(s.surface.len(), 2);
        assert_eq!(s.volume.len(), 3);
        assert_eq!(s.env.len(), 4);
    }

    #[test]
    fn orbit_file_matches_ring() {
        assert_eq!(ORBIT_PATH, format_camera_path(&orbit_cameras()));
        assert_eq!(parse_camera_path(ORBIT_PATH).unwrap(), orbit_cameras());
    }
}
