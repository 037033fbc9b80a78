"""Reference values from tests/oracles/generate.py (mpmath, 40 digits)."""
DELTA_1_ARGMAX = 8.156299529702745
DELTA_1 = 0.002969123783596896
DELTA_5 = 9.451861367515443e-06
K_ZERO = 8.986818915818128
K_M_D0002 = 8.40093683295917
W1_K_M_D0002 = -0.06639806908736112
SIGMA_PLUS = 4.4369186233122235
D_PLUS = 0.028246197032629303
TONGUE1_D0001 = (0.567398368235348, 0.9567237839029531)
TONGUE2_D1EM4 = (0.2653313030700548, 0.32016880343681464)
SIGMA3_D1EM6 = complex(0.6933436079659637, 18.806624883625496)
SIGMA1_D001 = complex(3.4229203041854492, 3.5173620699285713)
XF_D1EM8_T6000 = 7.8353507661545825
PHI0_3_4 = 0.15915494309189535
BUMP_MASS = 0.5333333333333333
