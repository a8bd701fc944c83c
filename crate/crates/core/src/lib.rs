//! Bake analytic scenes into hybrid volume-mesh assets and render them.

pub mod field;
pub mod image;
pub mod math;
pub mod refbasis;
pub mod scenes;
pub mod texture;
pub mod mesher;
pub mod raster;
pub mod sparsevol;
pub mod assets;
pub mod renderer;
pub mod pipeline;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scenes.md")]
    mod scenes {}
    #[doc = include_str!("../../../book/src/opacity.md")]
    mod opacity {}
    #[doc = include_str!("../../../book/src/appearance.md")]
    mod appearance {}
    #[doc = include_str!("../../../book/src/mesh.md")]
    mod mesh {}
    #[doc = include_str!("../../../book/src/volume.md")]
    mod volume {}
    #[doc = include_str!("../../../book/src/hashing.md")]
    mod hashing {}
    #[doc = include_str!("../../../book/src/container.md")]
    mod container {}
    #[doc = include_str!("../../../book/src/rendering.md")]
    mod rendering {}
}
