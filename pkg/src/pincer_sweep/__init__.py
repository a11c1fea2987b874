"""Planning and worst-case simulation for spiral pincer sweeps."""
