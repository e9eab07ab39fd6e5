"""grainforge: synthetic polycrystal dataset factory and characterization
toolkit.

Pipeline stages map onto submodules:

- seeding      periodic Voronoi structures, Lloyd area regularization
- simulation   multi-order-parameter curvature-driven grain growth
- rendering    composite field, ground-truth masks, instance maps
- appearance   procedural SEM-style texturing + translated-image ingest
- dataset      patching, augmentation, manifests, splits
- metrics      IoU, boundary F1, SSIM, entropy, histograms, texture
               features, t-SNE, CLAHE
- morphometry  per-grain statistics, size distributions, growth kinetics
- cli          command-line pipeline driver
"""

__version__ = "0.1.0"
