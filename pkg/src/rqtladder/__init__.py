"""Content-adaptive bitrate ladders from rate-quality-decode-time measurements."""
