#include <math.h>

void poisson_2d_fused(double *Y, double *X, double weight1, double lambda1, double *rhs,
        double a_h1, double *retval1) {
    for (int i1 = 0; i1 <= 4095; i1++) {
        double s1, s2, s3;
        int a1, b1;
        b1 = ((66*(i1 / 64)) + (i1 % 64));
        a1 = (b1 + 67);
        s1 = X[a1];
        s2 = ((((X[(b1 + 1)] + X[(b1 + 66)]) - (4.0*s1)) + X[(b1 + 68)]) + X[(b1 + 133)]);
        s3 = rhs[i1];
        Y[a1] = ((s1 + (weight1*s2)) - (lambda1*s3));
        *(retval1) = ((*(retval1) >= fabs((((1.0/(a_h1*a_h1))*s2) - s3))) ? *(retval1) : fabs((((1.0/(a_h1*a_h1))*s2) - s3)));
    }
}
