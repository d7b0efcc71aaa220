from .extract import extract_assets, load_assets
from .fetch import RawBundle, fetch_paper

__all__ = ["RawBundle", "fetch_paper", "extract_assets", "load_assets"]
