"""
Django settings for the qndmetrology project.

The toolkit knobs (simulator caps, regime threshold, finite-difference step,
optimizer bounds, Monte Carlo sample counts) live in ``QND_METROLOGY`` and can
be overridden from the environment or a ``.env`` file.
"""

from pathlib import Path
from dotenv import load_dotenv
import os

# Load environment variables from .env file
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-qnd-metrology-local-development-key')

# Set DEBUG=False in production via environment variable
DEBUG = os.getenv('DEBUG', 'True').lower() == 'true'

ALLOWED_HOSTS = [
    'localhost',
    '127.0.0.1',
]

# Add production domain to ALLOWED_HOSTS if set
PRODUCTION_DOMAIN = os.getenv('PRODUCTION_DOMAIN', '')
if PRODUCTION_DOMAIN:
    ALLOWED_HOSTS.append(PRODUCTION_DOMAIN)


# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',

    # Third party apps
    'rest_framework',
    'corsheaders',

    # Local apps
    'ensembles',  # Coupling weights, domain types, regime checks
    'formulas',  # Closed-form phase errors and optimal interaction strength
    'oracle',  # Exact Heisenberg-picture moments
    'simulator',  # State-vector simulation of the three protocols
    'disorder',  # Monte Carlo averaging over coupling disorder
    'experiments',  # Command-line front end and recorded runs
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'corsheaders.middleware.CorsMiddleware',  # CORS middleware should be before CommonMiddleware
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'qndmetrology.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'qndmetrology.wsgi.application'


# Database

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


# Static files

STATIC_URL = 'static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# REST Framework Configuration
# The API only evaluates formulas and lists recorded runs; there are no accounts.
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': (),
    'DEFAULT_PERMISSION_CLASSES': (
        'rest_framework.permissions.AllowAny',
    ),
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_RENDERER_CLASSES': (
        'rest_framework.renderers.JSONRenderer',
    ),
    'DEFAULT_PARSER_CLASSES': (
        'rest_framework.parsers.JSONParser',
        'rest_framework.parsers.FormParser',
    ),
}

# CORS Configuration
CORS_ALLOWED_ORIGINS = [
    "http://localhost:3000",
    "http://127.0.0.1:3000",
]

CORS_ALLOW_ALL_ORIGINS = os.getenv('CORS_ALLOW_ALL_ORIGINS', 'False').lower() == 'true'

CORS_ALLOW_METHODS = [
    'GET',
    'OPTIONS',
    'POST',
]


# QND metrology toolkit
QND_METROLOGY = {
    # Largest number of complex amplitudes a simulated state may hold
    'AMPLITUDE_CAP': int(os.getenv('QND_AMPLITUDE_CAP', 2 ** 30)),
    # Atoms always use the full 2^N product basis
    'MAX_ATOMS': int(os.getenv('QND_MAX_ATOMS', 14)),
    # Product-basis reference simulator: atoms + every photon as a qubit
    'PRODUCT_BASIS_MAX_QUBITS': int(os.getenv('QND_PRODUCT_BASIS_MAX_QUBITS', 22)),
    # A condition "x << 1" is reported satisfied when x < REGIME_THRESHOLD
    'REGIME_THRESHOLD': float(os.getenv('QND_REGIME_THRESHOLD', 0.1)),
    'FINITE_DIFFERENCE_STEP': float(os.getenv('QND_FINITE_DIFFERENCE_STEP', 1e-4)),
    # Largest N*(n+1) evaluated by the photon-conditioned oracle path per phase point
    'ORACLE_CONDITIONED_MAX_TERMS': int(float(os.getenv('QND_ORACLE_CONDITIONED_MAX_TERMS', 2e7))),
    'XI_MIN': float(os.getenv('QND_XI_MIN', 1e-3)),
    'XI_MAX': float(os.getenv('QND_XI_MAX', 100.0)),
    'OPTIMIZER_TOL': float(os.getenv('QND_OPTIMIZER_TOL', 1e-10)),
    'DISORDER_SAMPLES': int(os.getenv('QND_DISORDER_SAMPLES', 1000)),
    'SCALAR_SAMPLES': int(os.getenv('QND_SCALAR_SAMPLES', 100000)),
    'WORKERS': int(os.getenv('QND_WORKERS', 1)),
}


# Logging goes to stderr; stdout carries command output only
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'plain',
        },
    },
    'loggers': {
        name: {
            'handlers': ['console'],
            'level': os.getenv('QND_LOG_LEVEL', 'WARNING').upper(),
            'propagate': False,
        }
        for name in ('ensembles', 'formulas', 'oracle', 'simulator', 'disorder', 'experiments')
    },
}
