"""Reference note models and their rendering."""
