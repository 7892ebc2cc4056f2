// Generated by tools/gen_polars.py. Do not edit.
#pragma once

#include <string_view>

namespace heliquad::bundled {

inline constexpr std::string_view k_symmetric_polar = R"polar(# symmetric section, Re = 100000
# alpha_deg cl cd
-32.000000  -0.470000   0.490500
-31.500000  -0.485000   0.480500
-31.000000  -0.500000   0.470500
-30.500000  -0.515000   0.460500
-30.000000  -0.530000   0.450500
-29.500000  -0.545000   0.440500
-29.000000  -0.560000   0.430500
-28.500000  -0.575000   0.420500
-28.000000  -0.590000   0.410500
-27.500000  -0.605000   0.400500
-27.000000  -0.620000   0.390500
-26.500000  -0.635000   0.380500
-26.000000  -0.650000   0.370500
-25.500000  -0.665000   0.360500
-25.000000  -0.680000   0.350500
-24.500000  -0.695000   0.340500
-24.000000  -0.710000   0.330500
-23.500000  -0.725000   0.320500
-23.000000  -0.740000   0.310500
-22.500000  -0.755000   0.300500
-22.000000  -0.770000   0.290500
-21.500000  -0.785000   0.280500
-21.000000  -0.800000   0.270500
-20.500000  -0.815000   0.260500
-20.000000  -0.830000   0.250500
-19.500000  -0.845000   0.240500
-19.000000  -0.860000   0.230500
-18.500000  -0.875000   0.220500
-18.000000  -0.890000   0.210500
-17.500000  -0.905000   0.200500
-17.000000  -0.920000   0.190500
-16.500000  -0.935000   0.180500
-16.000000  -0.950000   0.170500
-15.500000  -0.965000   0.160500
-15.000000  -0.980000   0.150500
-14.500000  -0.995000   0.140500
-14.000000  -1.010000   0.130500
-13.500000  -1.025000   0.120500
-13.000000  -1.040000   0.110500
-12.500000  -1.055000   0.100500
-12.000000  -1.070000   0.090500
-11.500000  -1.085000   0.080500
-11.000000  -1.100000   0.070500
-10.500000  -1.050000   0.065125
-10.000000  -1.000000   0.060000
 -9.500000  -0.950000   0.055125
 -9.000000  -0.900000   0.050500
 -8.500000  -0.850000   0.046125
 -8.000000  -0.800000   0.042000
 -7.500000  -0.750000   0.038125
 -7.000000  -0.700000   0.034500
 -6.500000  -0.650000   0.031125
 -6.000000  -0.600000   0.028000
 -5.500000  -0.550000   0.025125
 -5.000000  -0.500000   0.022500
 -4.500000  -0.450000   0.020125
 -4.000000  -0.400000   0.018000
 -3.500000  -0.350000   0.016125
 -3.000000  -0.300000   0.014500
 -2.500000  -0.250000   0.013125
 -2.000000  -0.200000   0.012000
 -1.500000  -0.150000   0.011125
 -1.000000  -0.100000   0.010500
 -0.500000  -0.050000   0.010125
  0.000000   0.000000   0.010000
  0.500000   0.050000   0.010125
  1.000000   0.100000   0.010500
  1.500000   0.150000   0.011125
  2.000000   0.200000   0.012000
  2.500000   0.250000   0.013125
  3.000000   0.300000   0.014500
  3.500000   0.350000   0.016125
  4.000000   0.400000   0.018000
  4.500000   0.450000   0.020125
  5.000000   0.500000   0.022500
  5.500000   0.550000   0.025125
  6.000000   0.600000   0.028000
  6.500000   0.650000   0.031125
  7.000000   0.700000   0.034500
  7.500000   0.750000   0.038125
  8.000000   0.800000   0.042000
  8.500000   0.850000   0.046125
  9.000000   0.900000   0.050500
  9.500000   0.950000   0.055125
 10.000000   1.000000   0.060000
 10.500000   1.050000   0.065125
 11.000000   1.100000   0.070500
 11.500000   1.085000   0.080500
 12.000000   1.070000   0.090500
 12.500000   1.055000   0.100500
 13.000000   1.040000   0.110500
 13.500000   1.025000   0.120500
 14.000000   1.010000   0.130500
 14.500000   0.995000   0.140500
 15.000000   0.980000   0.150500
 15.500000   0.965000   0.160500
 16.000000   0.950000   0.170500
 16.500000   0.935000   0.180500
 17.000000   0.920000   0.190500
 17.500000   0.905000   0.200500
 18.000000   0.890000   0.210500
 18.500000   0.875000   0.220500
 19.000000   0.860000   0.230500
 19.500000   0.845000   0.240500
 20.000000   0.830000   0.250500
 20.500000   0.815000   0.260500
 21.000000   0.800000   0.270500
 21.500000   0.785000   0.280500
 22.000000   0.770000   0.290500
 22.500000   0.755000   0.300500
 23.000000   0.740000   0.310500
 23.500000   0.725000   0.320500
 24.000000   0.710000   0.330500
 24.500000   0.695000   0.340500
 25.000000   0.680000   0.350500
 25.500000   0.665000   0.360500
 26.000000   0.650000   0.370500
 26.500000   0.635000   0.380500
 27.000000   0.620000   0.390500
 27.500000   0.605000   0.400500
 28.000000   0.590000   0.410500
 28.500000   0.575000   0.420500
 29.000000   0.560000   0.430500
 29.500000   0.545000   0.440500
 30.000000   0.530000   0.450500
 30.500000   0.515000   0.460500
 31.000000   0.500000   0.470500
 31.500000   0.485000   0.480500
 32.000000   0.470000   0.490500
)polar";

inline constexpr std::string_view k_cambered_polar = R"polar(# cambered section, Re = 100000
# alpha_deg cl cd
-32.000000  -0.264000   0.627625
-31.500000  -0.279000   0.617625
-31.000000  -0.294000   0.607625
-30.500000  -0.309000   0.597625
-30.000000  -0.324000   0.587625
-29.500000  -0.339000   0.577625
-29.000000  -0.354000   0.567625
-28.500000  -0.369000   0.557625
-28.000000  -0.384000   0.547625
-27.500000  -0.399000   0.537625
-27.000000  -0.414000   0.527625
-26.500000  -0.429000   0.517625
-26.000000  -0.444000   0.507625
-25.500000  -0.459000   0.497625
-25.000000  -0.474000   0.487625
-24.500000  -0.489000   0.477625
-24.000000  -0.504000   0.467625
-23.500000  -0.519000   0.457625
-23.000000  -0.534000   0.447625
-22.500000  -0.549000   0.437625
-22.000000  -0.564000   0.427625
-21.500000  -0.579000   0.417625
-21.000000  -0.594000   0.407625
-20.500000  -0.609000   0.397625
-20.000000  -0.624000   0.387625
-19.500000  -0.639000   0.377625
-19.000000  -0.654000   0.367625
-18.500000  -0.669000   0.357625
-18.000000  -0.684000   0.347625
-17.500000  -0.699000   0.337625
-17.000000  -0.714000   0.327625
-16.500000  -0.729000   0.317625
-16.000000  -0.744000   0.307625
-15.500000  -0.759000   0.297625
-15.000000  -0.774000   0.287625
-14.500000  -0.789000   0.277625
-14.000000  -0.804000   0.267625
-13.500000  -0.819000   0.257625
-13.000000  -0.834000   0.247625
-12.500000  -0.849000   0.237625
-12.000000  -0.864000   0.227625
-11.500000  -0.879000   0.217625
-11.000000  -0.894000   0.207625
-10.500000  -0.870000   0.195764
-10.000000  -0.820000   0.183056
 -9.500000  -0.770000   0.170842
 -9.000000  -0.720000   0.159120
 -8.500000  -0.670000   0.147892
 -8.000000  -0.620000   0.137156
 -7.500000  -0.570000   0.126914
 -7.000000  -0.520000   0.117164
 -6.500000  -0.470000   0.107908
 -6.000000  -0.420000   0.099145
 -5.500000  -0.370000   0.090875
 -5.000000  -0.320000   0.083098
 -4.500000  -0.270000   0.075814
 -4.000000  -0.220000   0.069023
 -3.500000  -0.170000   0.062725
 -3.000000  -0.120000   0.056920
 -2.500000  -0.070000   0.051608
 -2.000000  -0.020000   0.046789
 -1.800000   0.000000   0.045000
 -1.500000   0.030000   0.042464
 -1.000000   0.080000   0.038631
 -0.500000   0.130000   0.035292
  0.000000   0.180000   0.032445
  0.500000   0.230000   0.030092
  1.000000   0.280000   0.028231
  1.500000   0.330000   0.026864
  2.000000   0.380000   0.025989
  2.500000   0.430000   0.025608
  3.000000   0.480000   0.025720
  3.500000   0.530000   0.026325
  4.000000   0.580000   0.027423
  4.500000   0.630000   0.029014
  5.000000   0.680000   0.031098
  5.500000   0.730000   0.033675
  6.000000   0.780000   0.036745
  6.500000   0.830000   0.040308
  7.000000   0.880000   0.044364
  7.500000   0.930000   0.048914
  8.000000   0.980000   0.053956
  8.500000   1.030000   0.059492
  9.000000   1.080000   0.065520
  9.500000   1.130000   0.072042
 10.000000   1.180000   0.079056
 10.500000   1.230000   0.086564
 11.000000   1.280000   0.094564
 11.500000   1.291000   0.103903
 12.000000   1.276000   0.113903
 12.500000   1.261000   0.123903
 13.000000   1.246000   0.133903
 13.500000   1.231000   0.143903
 14.000000   1.216000   0.153903
 14.500000   1.201000   0.163903
 15.000000   1.186000   0.173903
 15.500000   1.171000   0.183903
 16.000000   1.156000   0.193903
 16.500000   1.141000   0.203903
 17.000000   1.126000   0.213903
 17.500000   1.111000   0.223903
 18.000000   1.096000   0.233903
 18.500000   1.081000   0.243903
 19.000000   1.066000   0.253903
 19.500000   1.051000   0.263903
 20.000000   1.036000   0.273903
 20.500000   1.021000   0.283903
 21.000000   1.006000   0.293903
 21.500000   0.991000   0.303903
 22.000000   0.976000   0.313903
 22.500000   0.961000   0.323903
 23.000000   0.946000   0.333903
 23.500000   0.931000   0.343903
 24.000000   0.916000   0.353903
 24.500000   0.901000   0.363903
 25.000000   0.886000   0.373903
 25.500000   0.871000   0.383903
 26.000000   0.856000   0.393903
 26.500000   0.841000   0.403903
 27.000000   0.826000   0.413903
 27.500000   0.811000   0.423903
 28.000000   0.796000   0.433903
 28.500000   0.781000   0.443903
 29.000000   0.766000   0.453903
 29.500000   0.751000   0.463903
 30.000000   0.736000   0.473903
 30.500000   0.721000   0.483903
 31.000000   0.706000   0.493903
 31.500000   0.691000   0.503903
 32.000000   0.676000   0.513903
)polar";

}  // namespace heliquad::bundled
