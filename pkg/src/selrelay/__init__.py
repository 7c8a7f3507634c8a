"""Two-hop selection relaying: closed forms, quadrature oracle and Monte Carlo."""
