"""Knowledge-graph / text generation toolkit: linearization, metrics, SCST."""
