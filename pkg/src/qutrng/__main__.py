from qutrng.cli import run

run()
