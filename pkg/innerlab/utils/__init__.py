''' Ambient utilities of innerlab: types, errors, logging, configuration and input/output. '''
