"""bihkit: residual verification workbench for weighted-biharmonicity
equations of immersed submanifolds in model spaces."""

__version__ = "0.1.0"
