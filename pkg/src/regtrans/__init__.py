"""Register transducers over infinite data words."""
