"""Test configuration."""
import os

# Set test environment variables
os.environ['SSIKIT_LOG_LEVEL'] = 'DEBUG'
os.environ.pop('SSIKIT_THREADS', None)
